/**
 * Handle-based bindings over the engine process.
 *
 * A Session owns one engine process; BoundHandle mirrors the handle-based
 * surface (config set/get, batch setup, processing, alignment, outputs).
 * Engine-owned buffers are copied into caller-owned typed arrays at the
 * boundary, and operations on a destroyed BoundHandle fail locally instead
 * of sending a stale index to the engine.
 */

import { EngineClient } from "./client.js";
import {
  ComplexArray,
  WireArray,
  decodeComplex64,
  decodeFloat32,
  encodeFloat32,
  encodeUint16,
  isWireArray,
} from "./codec.js";

export interface SimulationRequest {
  frameCount: number;
  frameWidth?: number;
  frameHeight?: number;
  pixelSize?: number;
  polCount?: number;
  beamGroupCount?: number;
  beamWaist?: number[];
  refTiltX?: number[];
  refTiltY?: number[];
  cameraPixelLevelCount?: number;
  wavelengths?: number[];
}

export interface SimulatedFrames {
  frames: Float32Array;
  frames16: Uint16Array;
  frameCount: number;
  frameWidth: number;
  frameHeight: number;
  pixelSize: number;
  polCount: number;
  beamGroupCount: number;
  modeCount: number;
  refTiltX: number[];
  refTiltY: number[];
  beamCentreX: number[];
  beamCentreY: number[];
  beamWaist: number[];
  wavelengths: number[];
}

export interface CoefResult {
  coefs: ComplexArray | null;
  batchCount: number;
  modeCount: number;
  polCount: number;
}

export interface FieldsResult {
  fields: ComplexArray;
  batchCount: number;
  polCount: number;
  xAxis: Float32Array;
  yAxis: Float32Array;
  width: number;
  height: number;
}

export class Session {
  readonly client: EngineClient;

  constructor(command?: string[]) {
    this.client = new EngineClient(command);
  }

  async createHandle(): Promise<BoundHandle> {
    const idx = (await this.client.call("create_handle")) as number;
    return new BoundHandle(this, idx);
  }

  async simulateFrames(request: SimulationRequest): Promise<SimulatedFrames> {
    const result = (await this.client.request("simulate_frames", {
      args: request,
    })) as Record<string, unknown>;
    return {
      frames: decodeFloat32(result.frames as WireArray),
      frames16: new Uint16Array(
        Buffer.from((result.frames16 as WireArray).data, "base64").buffer,
      ),
      frameCount: result.frameCount as number,
      frameWidth: result.frameWidth as number,
      frameHeight: result.frameHeight as number,
      pixelSize: result.pixelSize as number,
      polCount: result.polCount as number,
      beamGroupCount: result.beamGroupCount as number,
      modeCount: result.modeCount as number,
      refTiltX: result.refTiltX as number[],
      refTiltY: result.refTiltY as number[],
      beamCentreX: result.beamCentreX as number[],
      beamCentreY: result.beamCentreY as number[],
      beamWaist: result.beamWaist as number[],
      wavelengths: result.wavelengths as number[],
    };
  }

  close(): Promise<void> {
    return this.client.close();
  }
}

export class BoundHandle {
  readonly handleIdx: number;
  private session: Session;
  private liveFlag = true;

  constructor(session: Session, handleIdx: number) {
    this.session = session;
    this.handleIdx = handleIdx;
  }

  get live(): boolean {
    return this.liveFlag;
  }

  private assertLive(): void {
    if (!this.liveFlag) {
      throw new Error(`handle ${this.handleIdx} has been destroyed`);
    }
  }

  /** Engine function with this handle prepended to the arguments. */
  call(fn: string, args: unknown[] = []): Promise<unknown> {
    this.assertLive();
    return this.session.client.call(fn, [this.handleIdx, ...args]);
  }

  async destroy(): Promise<void> {
    this.assertLive();
    await this.session.client.call("destroy_handle", [this.handleIdx]);
    this.liveFlag = false;
  }

  // ------------------------------------------------------------- configure

  setFrameDimensions(width: number, height: number): Promise<unknown> {
    return this.call("config_set_frame_dimensions", [width, height]);
  }

  setFramePixelSize(pixelSize: number): Promise<unknown> {
    return this.call("config_set_frame_pixel_size", [pixelSize]);
  }

  setPolCount(polCount: number): Promise<unknown> {
    return this.call("config_set_pol_count", [polCount]);
  }

  setFftWindowSize(width: number, height: number): Promise<unknown> {
    return this.call("config_set_fft_window_size", [width, height]);
  }

  setFourierWindowRadius(radiusDeg: number): Promise<unknown> {
    return this.call("config_set_fourier_window_radius", [radiusDeg]);
  }

  setWavelengthCentre(lambda0: number): Promise<unknown> {
    return this.call("config_set_wavelength_centre", [lambda0]);
  }

  setTilt(axis: number, pol: number, tiltDeg: number): Promise<unknown> {
    return this.call("config_set_tilt", [axis, pol, tiltDeg]);
  }

  async getTilt(axis: number, pol: number): Promise<number> {
    return (await this.call("config_get_tilt", [axis, pol])) as number;
  }

  setBeamCentre(axis: number, pol: number, centre: number): Promise<unknown> {
    return this.call("config_set_beam_centre", [axis, pol, centre]);
  }

  setBasisWaist(pol: number, waist: number): Promise<unknown> {
    return this.call("config_set_basis_waist", [pol, waist]);
  }

  setBasisGroupCount(groupCount: number): Promise<unknown> {
    return this.call("config_set_basis_group_count", [groupCount]);
  }

  // ----------------------------------------------------------------- batch

  setBatch(batchCount: number, frames: Float32Array): Promise<unknown> {
    return this.call("set_batch", [
      batchCount,
      encodeFloat32(frames, [frames.length]),
    ]);
  }

  setBatchUint16(
    batchCount: number,
    frames: Uint16Array,
    transpose = 0,
  ): Promise<unknown> {
    return this.call("set_batch_uint16", [
      batchCount,
      encodeUint16(frames, [frames.length]),
      transpose,
    ]);
  }

  async processBatch(): Promise<CoefResult> {
    const raw = (await this.call("process_batch")) as unknown[];
    const [coefs, batchCount, modeCount, polCount] = raw;
    return {
      coefs: isWireArray(coefs) ? decodeComplex64(coefs) : null,
      batchCount: batchCount as number,
      modeCount: modeCount as number,
      polCount: polCount as number,
    };
  }

  async getCoefs(): Promise<CoefResult> {
    const raw = (await this.call("basis_get_coefs")) as unknown[];
    const [coefs, batchCount, modeCount, polCount] = raw;
    return {
      coefs: isWireArray(coefs) ? decodeComplex64(coefs) : null,
      batchCount: batchCount as number,
      modeCount: modeCount as number,
      polCount: polCount as number,
    };
  }

  async getFields(): Promise<FieldsResult | null> {
    const raw = (await this.call("get_fields")) as unknown[] | null;
    if (raw === null) return null;
    const [fields, batchCount, polCount, xAxis, yAxis, width, height] = raw;
    return {
      fields: decodeComplex64(fields as WireArray),
      batchCount: batchCount as number,
      polCount: polCount as number,
      xAxis: decodeFloat32(xAxis as WireArray),
      yAxis: decodeFloat32(yAxis as WireArray),
      width: width as number,
      height: height as number,
    };
  }

  // ------------------------------------------------------------- alignment

  async autoAlign(): Promise<number> {
    return (await this.call("auto_align")) as number;
  }

  async getMetric(metricIdx: number): Promise<number> {
    return (await this.call("auto_align_get_metric", [metricIdx])) as number;
  }

  // --------------------------------------------------------------- outputs

  viewportToFile(
    displayMode: number,
    forceProcessing: number,
    filename: string,
  ): Promise<unknown> {
    return this.call("get_viewport_to_file", [
      displayMode,
      forceProcessing,
      filename,
    ]);
  }
}
