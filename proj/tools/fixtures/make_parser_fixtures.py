#!/usr/bin/env python3
"""Regenerates the H.264 parser fixtures under tests/fixtures/streams.

Each fixture is a tiny baseline-profile CAVLC encode of a synthetic scene made
with libx264, plus the motion side data FFmpeg's H.264 decoder exports for it
(AV_CODEC_EXPORT_DATA_MVS):

  <name>.h264          Annex-B elementary stream
  <name>.ref.jsonl     one line per decoded frame: pict type and the raw
                       AVMotionVector entries
  <name>.mvdump.jsonl  the same vectors in the mvf MV-dump format
  <name>.meta.json     dimensions and encoder settings

Requires PyAV (pip install av), numpy and scipy. The outputs are committed;
the tests never run this script.
"""
import io
import json
import pathlib

import av
import numpy as np
from scipy import ndimage

OUT = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "streams"


def texture(rng, h, w, sigma=2.0):
    img = np.stack([ndimage.gaussian_filter(rng.random((h, w)), sigma) for _ in range(3)], axis=-1)
    img -= img.min()
    img /= img.max()
    return (img * 255).astype(np.uint8)


def crop(tex, x, y, w, h):
    return tex[y:y + h, x:x + w].copy()


def static_scene(rng, w, h, n):
    tex = texture(rng, h, w)
    return [tex.copy() for _ in range(n)]


def moving_block(rng, w, h, n):
    bg = texture(rng, h, w, 3.0)
    fg = texture(rng, 20, 20, 1.5)
    frames = []
    for t in range(n):
        img = bg.copy()
        x, y = 8 + 3 * t, 10 + 2 * t
        img[y:y + 20, x:x + 20] = fg
        frames.append(img)
    return frames


def pan(rng, w, h, n, dx, dy):
    tex = texture(rng, h + 8 * n, w + 8 * n)
    x0, y0 = 4 * n, 4 * n
    return [crop(tex, x0 - dx * t, y0 - dy * t, w, h) for t in range(n)]


def warp(rng, w, h, n):
    tex = texture(rng, 2 * h, 2 * w, 2.5)
    frames = []
    for t in range(n):
        s = 1.0 + 0.03 * t
        a = 0.04 * t
        cy, cx = tex.shape[0] / 2, tex.shape[1] / 2
        m = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]]) / s
        out = np.empty((h, w, 3), np.uint8)
        off = np.array([cy, cx]) - m @ np.array([h / 2, w / 2])
        for c in range(3):
            out[..., c] = ndimage.affine_transform(tex[..., c], m, offset=off, output_shape=(h, w), order=1)
        frames.append(out)
    return frames


def objects(rng, w, h, n, noise_patch=False):
    bg = texture(rng, h + 40, w + 40, 3.0)
    sprites = [texture(rng, 12, 12, 1.0) for _ in range(3)]
    vel = [(2, 1), (-1, 3), (3, -2)]
    pos = [(6, 6), (w - 20, 4), (10, h - 18)]
    frames = []
    for t in range(n):
        img = crop(bg, 20 + t, 20, w, h)
        for s, (vx, vy), (px, py) in zip(sprites, vel, pos):
            x = int(np.clip(px + vx * t, 0, w - 12))
            y = int(np.clip(py + vy * t, 0, h - 12))
            img[y:y + 12, x:x + 12] = s
        if noise_patch and t % 2 == 1:
            img[16:32, 16:40] = rng.integers(0, 255, (16, 24, 3), dtype=np.uint8)
        frames.append(img)
    return frames


def encode(frames, w, h, params):
    buf = io.BytesIO()
    out = av.open(buf, "w", format="h264")
    stream = out.add_stream("libx264", rate=25)
    stream.width, stream.height, stream.pix_fmt = w, h, "yuv420p"
    stream.options = {"profile": "baseline", "preset": "medium", "x264-params": params}
    for img in frames:
        for packet in stream.encode(av.VideoFrame.from_ndarray(img, format="rgb24")):
            out.mux(packet)
    for packet in stream.encode():
        out.mux(packet)
    out.close()
    return buf.getvalue()


def reference_dump(data):
    container = av.open(io.BytesIO(data), format="h264")
    vs = container.streams.video[0]
    vs.codec_context.options = {"flags2": "+export_mvs"}
    frames = []
    for index, frame in enumerate(container.decode(vs)):
        sd = frame.side_data.get("MOTION_VECTORS")
        mvs = [] if sd is None else [
            {k: int(v[k]) for k in ("source", "w", "h", "dst_x", "dst_y", "motion_x", "motion_y", "motion_scale")}
            for v in sd.to_ndarray()
        ]
        frames.append({"frame": index, "pict_type": frame.pict_type.name if hasattr(frame.pict_type, "name") else str(frame.pict_type), "mvs": mvs})
    return frames


def to_mvdump(frames):
    lines = []
    for f in frames:
        for v in f["mvs"]:
            lines.append({
                "frame_index": f["frame"],
                "direction": "past" if v["source"] < 0 else "future",
                "x0": v["dst_x"] - v["w"] // 2,
                "y0": v["dst_y"] - v["h"] // 2,
                "w": v["w"],
                "h": v["h"],
                "mv_x_qpel": v["motion_x"] * 4 // v["motion_scale"],
                "mv_y_qpel": v["motion_y"] * 4 // v["motion_scale"],
                # FFmpeg only exports the reference direction, not the distance.
                "ref_offset": -1 if v["source"] < 0 else 1,
            })
    return lines


BASE = "threads=1:sliced-threads=0:scenecut=0:bframes=0:subme=7:me=umh:qp=22"

FIXTURES = [
    ("static_64x64", 64, 64, lambda r: static_scene(r, 64, 64, 8), BASE + ":ref=1:keyint=30"),
    ("moving_block_64x64", 64, 64, lambda r: moving_block(r, 64, 64, 10), BASE + ":ref=1:keyint=30"),
    ("pan_96x64", 96, 64, lambda r: pan(r, 96, 64, 10, 3, -2), BASE + ":ref=2:keyint=30"),
    ("warp_multiref_80x48", 80, 48, lambda r: warp(r, 80, 48, 12), BASE + ":ref=4:keyint=5"),
    ("objects_slices_72x40", 72, 40, lambda r: objects(r, 72, 40, 12, noise_patch=True), BASE + ":ref=3:keyint=30:slices=3"),
    ("objects_p4x4_64x48", 64, 48, lambda r: objects(r, 64, 48, 10), BASE + ":ref=3:keyint=30:partitions=all"),
]

# Global integer translation used by the EPE checks; content moves (3, -2)
# pixels per frame.
TRANSLATION = ("translate_128x96", 128, 96, lambda r: pan(r, 128, 96, 8, 3, -2),
               "threads=1:sliced-threads=0:scenecut=0:bframes=0:subme=9:me=esa:merange=16:qp=4:ref=1:keyint=30")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for i, (name, w, h, make, params) in enumerate(FIXTURES + [TRANSLATION]):
        rng = np.random.default_rng(1000 + i)
        data = encode(make(rng), w, h, params)
        ref = reference_dump(data)
        (OUT / f"{name}.h264").write_bytes(data)
        with open(OUT / f"{name}.ref.jsonl", "w") as f:
            for frame in ref:
                f.write(json.dumps(frame, separators=(",", ":")) + "\n")
        with open(OUT / f"{name}.mvdump.jsonl", "w") as f:
            for line in to_mvdump(ref):
                f.write(json.dumps(line, separators=(",", ":")) + "\n")
        meta = {"name": name, "width": w, "height": h, "x264_params": params, "frames": len(ref),
                "p_frames": sum(1 for fr in ref if fr["pict_type"] == "P"),
                "mv_count": sum(len(fr["mvs"]) for fr in ref)}
        (OUT / f"{name}.meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        print(name, len(data), "bytes", meta["frames"], "frames", meta["mv_count"], "mvs")


if __name__ == "__main__":
    main()
