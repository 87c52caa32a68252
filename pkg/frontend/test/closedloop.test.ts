/**
 * Closed-loop identity driven entirely through the bindings, plus the
 * cross-surface check: the same uint16 frames processed via the CLI's
 * settings-file runner must produce the identical coefficient matrix.
 */

import { execFile } from "node:child_process";
import { mkdtemp, readFile, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import {
  ComplexArray,
  Session,
  SimulatedFrames,
  defaultCommand,
} from "../src/index.js";

const execFileAsync = promisify(execFile);

let session: Session;
let sim: SimulatedFrames;
let bindingCoefs: ComplexArray;
let workDir: string;

const BATCH = 10;

beforeAll(async () => {
  session = new Session();
  workDir = await mkdtemp(join(tmpdir(), "holopipe-ts-"));
  sim = await session.simulateFrames({
    frameCount: BATCH,
    frameWidth: 256,
    frameHeight: 256,
    polCount: 1,
    beamGroupCount: 4,
  });
}, 60000);

afterAll(async () => {
  await session.close();
  await rm(workDir, { recursive: true, force: true });
});

async function configure(handle: Awaited<ReturnType<Session["createHandle"]>>) {
  await handle.setFrameDimensions(sim.frameWidth, sim.frameHeight);
  await handle.setFramePixelSize(sim.pixelSize);
  await handle.setPolCount(sim.polCount);
  await handle.setFftWindowSize(256, 256);
  await handle.setWavelengthCentre(sim.wavelengths[0]);
  await handle.setTilt(0, 0, sim.refTiltX[0]);
  await handle.setTilt(1, 0, sim.refTiltY[0]);
  await handle.setBeamCentre(0, 0, sim.beamCentreX[0]);
  await handle.setBeamCentre(1, 0, sim.beamCentreY[0]);
  await handle.setBasisWaist(0, sim.beamWaist[0]);
  await handle.setBasisGroupCount(sim.beamGroupCount);
}

describe("closed-loop identity through the bindings", () => {
  it("reconstructs a near-identity transfer matrix", async () => {
    const handle = await session.createHandle();
    await configure(handle);
    await handle.setBatchUint16(BATCH, sim.frames16);
    const result = await handle.processBatch();
    expect(result.batchCount).toBe(BATCH);
    expect(result.modeCount).toBe(10);
    expect(result.polCount).toBe(1);
    expect(result.coefs).not.toBeNull();
    bindingCoefs = result.coefs!;
    expect(bindingCoefs.shape).toEqual([BATCH, 10]);

    // Normalise the RMS row power to one, then check diagonal dominance.
    const v = bindingCoefs.values;
    const rows = BATCH;
    const cols = 10;
    let total = 0;
    for (let i = 0; i < v.length; i += 2) {
      total += v[i] * v[i] + v[i + 1] * v[i + 1];
    }
    const scale = total / rows;
    for (let r = 0; r < rows; r++) {
      let rowPower = 0;
      let diagPower = 0;
      for (let c = 0; c < cols; c++) {
        const k = 2 * (r * cols + c);
        const p = (v[k] * v[k] + v[k + 1] * v[k + 1]) / scale;
        rowPower += p;
        if (c === r) diagPower = p;
      }
      expect(diagPower).toBeGreaterThan(0.95);
      expect(rowPower - diagPower).toBeLessThan(0.02);
    }
    await handle.destroy();
  }, 120000);

  it("matches the CLI settings-file surface within float round-off", async () => {
    expect(bindingCoefs).toBeDefined();
    const framesPath = join(workDir, "frames.bin");
    await writeFile(framesPath, Buffer.from(sim.frames16.buffer));
    const coefsPath = join(workDir, "coefs.bin");
    const settings = [
      `FrameDimensions\t${sim.frameWidth}\t${sim.frameHeight}`,
      `FramePixelSize\t${sim.pixelSize}`,
      `PolCount\t${sim.polCount}`,
      `fftWindowSize\t256\t256`,
      `WavelengthCentre\t${sim.wavelengths[0]}`,
      `TiltX\t${sim.refTiltX[0]}`,
      `TiltY\t${sim.refTiltY[0]}`,
      `BeamCentreX\t${sim.beamCentreX[0]}`,
      `BeamCentreY\t${sim.beamCentreY[0]}`,
      `BasisWaist\t${sim.beamWaist[0]}`,
      `BasisGroupCount\t${sim.beamGroupCount}`,
      `BatchCount\t${BATCH}`,
      `FrameBuffer\t${framesPath}`,
      `OutputFilenameCoefs\t${coefsPath}`,
    ].join("\n") + "\n";
    const settingsPath = join(workDir, "run.txt");
    await writeFile(settingsPath, settings);

    // The CLI command is the RPC command minus the --rpc flag.
    const cmd = defaultCommand().filter((part) => part !== "--rpc");
    await execFileAsync(cmd[0], [...cmd.slice(1), settingsPath]);

    const blob = await readFile(coefsPath);
    const cli = new Float32Array(
      blob.buffer,
      blob.byteOffset,
      blob.byteLength / 4,
    );
    expect(cli.length).toBe(bindingCoefs.values.length);
    let peak = 0;
    for (let i = 0; i < cli.length; i++) {
      peak = Math.max(peak, Math.abs(cli[i]));
    }
    let worst = 0;
    for (let i = 0; i < cli.length; i++) {
      worst = Math.max(worst, Math.abs(cli[i] - bindingCoefs.values[i]));
    }
    expect(worst).toBeLessThanOrEqual(peak * 1e-6);
  }, 120000);
});
