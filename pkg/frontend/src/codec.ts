/**
 * Array marshalling for the stdio JSON protocol.
 *
 * Arrays cross the boundary as little-endian base64 with explicit dtype and
 * shape; complex data travels as interleaved float32 (re, im) pairs.
 */

export interface WireArray {
  __array__: true;
  dtype: string;
  shape: number[];
  data: string;
}

export interface ComplexArray {
  /** Interleaved (re, im) pairs, length 2 * product(shape). */
  values: Float32Array;
  shape: number[];
}

function toBase64(view: ArrayBufferView): string {
  return Buffer.from(view.buffer, view.byteOffset, view.byteLength).toString(
    "base64",
  );
}

export function encodeFloat32(data: Float32Array, shape: number[]): WireArray {
  return { __array__: true, dtype: "float32", shape, data: toBase64(data) };
}

export function encodeUint16(data: Uint16Array, shape: number[]): WireArray {
  return { __array__: true, dtype: "uint16", shape, data: toBase64(data) };
}

export function encodeComplex64(arr: ComplexArray): WireArray {
  return {
    __array__: true,
    dtype: "complex64",
    shape: arr.shape,
    data: toBase64(arr.values),
  };
}

export function isWireArray(value: unknown): value is WireArray {
  return (
    typeof value === "object" &&
    value !== null &&
    (value as WireArray).__array__ === true
  );
}

function rawBuffer(wire: WireArray): Buffer {
  return Buffer.from(wire.data, "base64");
}

export function decodeFloat32(wire: WireArray): Float32Array {
  const buf = rawBuffer(wire);
  return new Float32Array(buf.buffer, buf.byteOffset, buf.byteLength / 4);
}

export function decodeUint16(wire: WireArray): Uint16Array {
  const buf = rawBuffer(wire);
  return new Uint16Array(buf.buffer, buf.byteOffset, buf.byteLength / 2);
}

export function decodeComplex64(wire: WireArray): ComplexArray {
  const buf = rawBuffer(wire);
  return {
    values: new Float32Array(buf.buffer, buf.byteOffset, buf.byteLength / 4),
    shape: wire.shape,
  };
}

export function decodeAny(wire: WireArray): Float32Array | Uint16Array |
    Int16Array | ComplexArray {
  switch (wire.dtype) {
    case "float32":
      return decodeFloat32(wire);
    case "uint16":
      return decodeUint16(wire);
    case "int16": {
      const buf = rawBuffer(wire);
      return new Int16Array(buf.buffer, buf.byteOffset, buf.byteLength / 2);
    }
    case "complex64":
      return decodeComplex64(wire);
    default:
      throw new Error(`unsupported wire dtype ${wire.dtype}`);
  }
}
