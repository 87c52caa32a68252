"""Line-delimited JSON command protocol over stdio.

Drives the whole handle-based surface from another process (the scripting
bindings use this instead of in-process linking).  One request per line:

    {"id": 1, "op": "call", "fn": "config_set_tilt", "args": [0, 0, 0, 1.5]}

Replies are {"id": 1, "result": ...} or {"id": 1, "error": {"code": int,
"message": str}}.  A setter returning a nonzero ErrorCode becomes an error
reply carrying that integer code.  Arrays cross the boundary as
little-endian base64 with explicit dtype and shape; complex data travels as
interleaved float32 pairs:

    {"__array__": true, "dtype": "complex64", "shape": [2, 3], "data": "..."}
"""

import base64
import json
import sys

import numpy as np

from . import api, simulate
from .errors import ErrorCode, HoloError

_DTYPES = {
    "float32": "<f4",
    "float64": "<f8",
    "uint16": "<u2",
    "int16": "<i2",
    "int32": "<i4",
    "uint8": "<u1",
}


def encode_array(arr):
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        inter = np.empty(arr.shape + (2,), dtype="<f4")
        inter[..., 0] = arr.real
        inter[..., 1] = arr.imag
        return {"__array__": True, "dtype": "complex64",
                "shape": list(arr.shape),
                "data": base64.b64encode(inter.tobytes()).decode("ascii")}
    name = str(arr.dtype)
    code = _DTYPES.get(name)
    if code is None:
        arr = arr.astype(np.float64)
        name, code = "float64", "<f8"
    return {"__array__": True, "dtype": name, "shape": list(arr.shape),
            "data": base64.b64encode(arr.astype(code).tobytes()).decode("ascii")}


def decode_value(value):
    if isinstance(value, dict) and value.get("__array__"):
        raw = base64.b64decode(value["data"])
        shape = tuple(value["shape"])
        if value["dtype"] == "complex64":
            flat = np.frombuffer(raw, dtype="<f4").reshape(shape + (2,))
            return (flat[..., 0] + 1j * flat[..., 1]).astype(np.complex64)
        return np.frombuffer(raw, dtype=_DTYPES[value["dtype"]]).reshape(shape).copy()
    if isinstance(value, list):
        return [decode_value(v) for v in value]
    return value


def encode_value(value):
    from .analysis import AnalysisSummary

    if isinstance(value, np.ndarray):
        return encode_array(value)
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, ErrorCode):
        return int(value)
    if isinstance(value, tuple):
        return [encode_value(v) for v in value]
    if isinstance(value, complex):
        return {"__complex__": True, "re": value.real, "im": value.imag}
    if isinstance(value, AnalysisSummary):
        return {"parameters": encode_array(value.parameters),
                "totalIntensity": encode_array(value.total_intensity),
                "xAxis": encode_array(value.x_axis),
                "yAxis": encode_array(value.y_axis),
                "plane": value.plane}
    return value


# Functions reachable through {"op": "call"}.  Everything here either lives
# in api (handle-based) or is a simulator entry point.
_EXTRA = {
    "simulate_frames_simple": simulate.simulate_frames_simple,
    "simulator_destroy": simulate.simulator_destroy,
}


def _resolve(fn_name):
    if fn_name in _EXTRA:
        return _EXTRA[fn_name]
    if fn_name.startswith("_"):
        return None
    func = getattr(api, fn_name, None)
    return func if callable(func) else None


def _simulate_frames_op(args):
    spec = simulate.SimulationSpec()
    for key, value in args.items():
        if hasattr(spec, key):
            setattr(spec, key, decode_value(value))
    f32, u16, resolved = simulate.simulate_frames(spec)
    out = {"frames": encode_array(f32), "frames16": encode_array(u16)}
    for key in resolved.__dataclass_fields__:
        out[key] = encode_value(getattr(resolved, key))
        if isinstance(out[key], list):
            out[key] = [encode_value(v) for v in out[key]]
    out["modeCount"] = resolved.mode_count()
    return out


def handle_request(request):
    rid = request.get("id")
    op = request.get("op")
    try:
        if op == "ping":
            return {"id": rid, "result": "pong"}
        if op == "shutdown":
            return {"id": rid, "result": True, "__shutdown__": True}
        if op == "simulate_frames":
            return {"id": rid, "result": _simulate_frames_op(request.get("args", {}))}
        if op == "call":
            func = _resolve(request.get("fn", ""))
            if func is None:
                return {"id": rid, "error": {"code": int(ErrorCode.INVALIDARGUMENT),
                                             "message": f"unknown function {request.get('fn')}"}}
            args = [decode_value(a) for a in request.get("args", [])]
            result = func(*args)
            if isinstance(result, ErrorCode) and result != ErrorCode.SUCCESS:
                return {"id": rid, "error": {"code": int(result),
                                             "message": result.name}}
            return {"id": rid, "result": encode_value(result)}
        return {"id": rid, "error": {"code": int(ErrorCode.INVALIDARGUMENT),
                                     "message": f"unknown op {op}"}}
    except HoloError as err:
        return {"id": rid, "error": {"code": int(err.code),
                                     "message": str(err)}}
    except Exception as err:  # surface as the generic code, never crash
        return {"id": rid, "error": {"code": int(ErrorCode.ERROR),
                                     "message": f"{type(err).__name__}: {err}"}}


def serve(stdin=None, stdout=None):
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as err:
            stdout.write(json.dumps({"id": None,
                                     "error": {"code": int(ErrorCode.ERROR),
                                               "message": str(err)}}) + "\n")
            stdout.flush()
            continue
        reply = handle_request(request)
        shutdown = reply.pop("__shutdown__", False)
        stdout.write(json.dumps(reply) + "\n")
        stdout.flush()
        if shutdown:
            break
