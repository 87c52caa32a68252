export { ErrorCode, HoloError } from "./errors.js";
export { EngineClient, defaultCommand } from "./client.js";
export {
  BoundHandle,
  Session,
  type CoefResult,
  type FieldsResult,
  type SimulatedFrames,
  type SimulationRequest,
} from "./api.js";
export {
  decodeComplex64,
  decodeFloat32,
  decodeUint16,
  encodeComplex64,
  encodeFloat32,
  encodeUint16,
  isWireArray,
  type ComplexArray,
  type WireArray,
} from "./codec.js";
