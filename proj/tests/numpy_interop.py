"""Checks that tensors written by layerprobe are what numpy itself writes, and
that layerprobe reads arrays saved by numpy."""

import pathlib
import subprocess
import sys
import tempfile

import numpy as np

exe = sys.argv[1]

with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    subprocess.run([exe, "synth", "--layers", "3", "--dims", "7", "--content", "2",
                    "--style", "3", "--reps", "2", "-o", str(tmp / "s")], check=True)
    ours = (tmp / "s" / "tensor.npy").read_bytes()
    arr = np.load(tmp / "s" / "tensor.npy")
    assert arr.shape == (3, 12, 7) and arr.dtype == np.dtype("<f4"), (arr.shape, arr.dtype)
    np.save(tmp / "theirs.npy", arr)
    assert (tmp / "theirs.npy").read_bytes() == ours, "bytes differ from np.save"

    pts = np.array([[[0.0], [0.0], [1.0], [1.0]]], dtype="<f4")
    np.save(tmp / "hand.npy", pts)
    (tmp / "hand.csv").write_text("index,group\n0,A\n1,A\n2,B\n3,B\n")
    out = subprocess.run([exe, "gdv", "--tensor", str(tmp / "hand.npy"), "--labels",
                          str(tmp / "hand.csv")], check=True, capture_output=True, text=True)
    assert out.stdout.splitlines()[1] == "0,group,raw,-1.000000000,2,4", out.stdout

print("numpy interop ok")
