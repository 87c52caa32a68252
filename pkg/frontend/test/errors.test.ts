import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ErrorCode, HoloError, Session } from "../src/index.js";

let session: Session;

beforeAll(async () => {
  session = new Session();
  expect(await session.client.ping()).toBe(true);
});

afterAll(async () => {
  await session.close();
});

describe("error code mapping", () => {
  it("maps INVALIDHANDLE (2) for a destroyed/unknown handle", async () => {
    let caught: unknown;
    try {
      await session.client.call("destroy_handle", [-1]);
    } catch (err) {
      caught = err;
    }
    expect(caught).toBeInstanceOf(HoloError);
    expect((caught as HoloError).code).toBe(ErrorCode.INVALIDHANDLE);
  });

  it("maps NULLPOINTER (3) for a null frame buffer", async () => {
    const handle = await session.createHandle();
    let caught: unknown;
    try {
      await session.client.call("set_frame_buffer", [handle.handleIdx, null]);
    } catch (err) {
      caught = err;
    }
    expect((caught as HoloError).code).toBe(ErrorCode.NULLPOINTER);
    await handle.destroy();
  });

  it("maps INVALIDARGUMENT (8) for an out-of-range goal index", async () => {
    const handle = await session.createHandle();
    let caught: unknown;
    try {
      await handle.call("config_set_auto_align_goal_idx", [99]);
    } catch (err) {
      caught = err;
    }
    expect((caught as HoloError).code).toBe(ErrorCode.INVALIDARGUMENT);
    await handle.destroy();
  });

  it("rejects locally on a destroyed BoundHandle", async () => {
    const handle = await session.createHandle();
    await handle.destroy();
    expect(handle.live).toBe(false);
    expect(() => handle.call("config_get_pol_count")).toThrowError(
      /destroyed/,
    );
  });

  it("round-trips a config value through set/get", async () => {
    const handle = await session.createHandle();
    await handle.setTilt(0, 0, 1.25);
    expect(await handle.getTilt(0, 0)).toBeCloseTo(1.25, 12);
    await handle.destroy();
  });
});
