#!/usr/bin/env python3
"""Regenerates the bundled world files under data/worlds/."""
import math
import pathlib

OUT = pathlib.Path(__file__).resolve().parents[2] / "data" / "worlds"


def rect(x0, y0, x1, y1):
    return [(x0, y0, x1, y0), (x1, y0, x1, y1), (x1, y1, x0, y1), (x0, y1, x0, y0)]


def cylinder(cx, cy, r, sides=16):
    pts = [(cx + r * math.cos(2 * math.pi * k / sides), cy + r * math.sin(2 * math.pi * k / sides))
           for k in range(sides)]
    return [(*pts[k], *pts[(k + 1) % sides]) for k in range(sides)]


def write(name, comment, bounds, segments, starts):
    lines = [f"# {line}" for line in comment.splitlines()]
    lines += [f"name {name}", "[bounds]", " ".join(f"{v:g}" for v in bounds), "[segments]"]
    lines += [" ".join(f"{v:.6f}".rstrip("0").rstrip(".") for v in s) for s in segments]
    lines += ["[starts]"]
    lines += [f"{x:g} {y:g} {h:g}" for x, y, h in starts]
    assert len(starts) == 12
    (OUT / f"{name}.world").write_text("\n".join(lines) + "\n")


def paper_like():
    segs = rect(0, 0, 10, 8)
    # partitions and corridors
    segs += [(3.5, 0, 3.5, 2.6), (6.5, 8, 6.5, 5.4), (0, 5.2, 2.0, 5.2), (8.0, 3.0, 10, 3.0)]
    # boxes with sharp corners
    segs += rect(7.4, 1.0, 8.4, 1.8)
    segs += rect(4.6, 5.6, 5.4, 6.4)
    # a wedge
    segs += [(1.2, 1.0, 2.2, 1.0), (2.2, 1.0, 1.2, 2.0), (1.2, 2.0, 1.2, 1.0)]
    # cylinders
    for cx, cy in [(5.0, 3.6), (2.4, 3.4), (8.6, 5.6), (3.6, 6.6), (6.0, 1.6)]:
        segs += cylinder(cx, cy, 0.3)
    starts = [
        (1.0, 3.4, 0), (2.4, 6.6, 0), (4.7, 1.2, 90), (8.8, 2.2, 180),
        (8.2, 4.2, 90), (5.0, 7.2, 180), (6.3, 3.6, 90), (4.5, 4.6, 180),
        (9.0, 7.0, -90), (2.3, 0.5, 0), (1.0, 7.0, -90), (7.5, 6.8, -90),
    ]
    write("paper_like",
          "Multi-obstacle indoor map: partitions, a corridor, boxes, a wedge and\n"
          "five cylinders (16-gon rings). 12 start poses, headings in degrees.",
          (0, 0, 10, 8), segs, starts)


def square_room():
    starts = [(2 + 0.6 * math.cos(k * math.pi / 6), 2 + 0.6 * math.sin(k * math.pi / 6), k * 30)
              for k in range(12)]
    write("square_4m", "Empty 4 x 4 m room.", (0, 0, 4, 4), rect(0, 0, 4, 4),
          [(round(x, 6), round(y, 6), h) for x, y, h in starts])


def closed_tiny():
    starts = [(1.0, 1.0, k * 30) for k in range(12)]
    write("closed_tiny", "Closed 2 x 2 m room; every episode ends in a collision.",
          (0, 0, 2, 2), rect(0, 0, 2, 2), starts)


def corridor():
    # 6 m long, 1.6 m wide corridor; every start faces the east end wall.
    segs = rect(0, 0, 6, 1.6)
    starts = [(round(0.6 + 0.35 * k, 2), 0.8, 0) for k in range(12)]
    write("corridor", "Straight corridor 6 x 1.6 m; every start faces the east wall.",
          (0, 0, 6, 1.6), segs, starts)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    paper_like()
    square_room()
    closed_tiny()
    corridor()
