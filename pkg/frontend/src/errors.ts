/** Error codes mirrored from the engine's contract (values are fixed). */
export enum ErrorCode {
  SUCCESS = 0,
  ERROR = 1,
  INVALIDHANDLE = 2,
  NULLPOINTER = 3,
  SETFRAMEBUFFERDISABLED = 4,
  INVALIDDIMENSION = 5,
  INVALIDPOLARISATION = 6,
  INVALIDAXIS = 7,
  INVALIDARGUMENT = 8,
  MEMORYALLOCATION = 9,
  FILENOTCREATED = 10,
  FILENOTFOUND = 11,
}

/** Engine-side failures surface as exceptions carrying the integer code. */
export class HoloError extends Error {
  readonly code: number;

  constructor(code: number, message?: string) {
    super(message ?? `engine error ${code} (${ErrorCode[code] ?? "unknown"})`);
    this.name = "HoloError";
    this.code = code;
  }
}
