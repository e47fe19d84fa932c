#!/usr/bin/env python3
"""Minimal PNPD denoising server in Python.

Reads request frames on stdin and answers on stdout. The "denoiser" here is a
separable box smoothing whose strength grows with the requested number of
reverse steps; replace `denoise` with a real reverse-diffusion model to plug a
trained network into `pnp-sgs run`.

Frame layout (little-endian):
  request:  "PNPD" | u32 version=1 | u32 msg_type=1 | u32 t_start | u32 t_stop
            | u32 ndim=3 | u32 C | u32 H | u32 W | C*H*W float32
  ok:       "PNPD" | u32 version=1 | u32 msg_type=2 | u32 ndim=3
            | u32 C | u32 H | u32 W | C*H*W float32
  error:    "PNPD" | u32 version=1 | u32 msg_type=3 | u32 len | len bytes UTF-8
"""

import struct
import sys

import numpy as np

MAGIC = b"PNPD"
VERSION = 1


def read_exact(stream, size):
    buf = b""
    while len(buf) < size:
        chunk = stream.read(size - len(buf))
        if not chunk:
            return None if not buf else (_ for _ in ()).throw(EOFError("truncated frame"))
        buf += chunk
    return buf


def denoise(tensor, t_start, t_stop):
    steps = max(t_start - t_stop, 0)
    passes = min(1 + steps // 25, 8)
    out = tensor.astype(np.float64)
    for _ in range(passes):
        out = (np.roll(out, 1, axis=1) + out + np.roll(out, -1, axis=1)) / 3.0
        out = (np.roll(out, 1, axis=2) + out + np.roll(out, -1, axis=2)) / 3.0
    return out.astype(np.float32)


def main():
    stdin, stdout = sys.stdin.buffer, sys.stdout.buffer
    while True:
        head = read_exact(stdin, 4)
        if head is None:
            return 0
        if head != MAGIC:
            stdout.write(MAGIC + struct.pack("<II", VERSION, 3))
            msg = b"bad magic in request"
            stdout.write(struct.pack("<I", len(msg)) + msg)
            stdout.flush()
            return 1
        version, msg_type, t_start, t_stop, ndim, c, h, w = struct.unpack(
            "<8I", read_exact(stdin, 32)
        )
        if version != VERSION or msg_type != 1 or ndim != 3:
            return 1
        payload = np.frombuffer(read_exact(stdin, 4 * c * h * w), dtype="<f4")
        result = denoise(payload.reshape(c, h, w), t_start, t_stop)
        stdout.write(MAGIC + struct.pack("<6I", VERSION, 2, 3, c, h, w))
        stdout.write(result.tobytes())
        stdout.flush()


if __name__ == "__main__":
    sys.exit(main())
