"""Byte-deterministic raster (binary PPM) and vector (SVG) region maps.

Both formats draw the grid with the y axis pointing up and a colour
legend strip above the map.  PPM has no text, so axis names, ranges and
the legend order travel as header comments.
"""

from __future__ import annotations

import re
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .params import config_key, field_name
from .sweep import COLOR_CODES, COLORS, LEGEND, RegionGrid

SWATCH = 12
MARGIN = 60
LEGEND_ROW = 18


def _axis_names(grid: RegionGrid) -> tuple[str, str]:
    sp = grid.spec
    return config_key(field_name(sp.axis_x)), config_key(field_name(sp.axis_y))


def _scale_for(grid: RegionGrid) -> int:
    ny, nx = grid.colors.shape
    return max(1, 400 // max(nx, ny))


def render(grid: RegionGrid, path) -> None:
    """Write ``grid`` as ``.ppm`` or ``.svg``, chosen by file extension."""
    suffix = Path(path).suffix.lower()
    if suffix == ".ppm":
        data = render_ppm(grid)
    elif suffix == ".svg":
        data = render_svg(grid).encode("utf-8")
    else:
        raise ValueError(f"unsupported image extension {suffix!r}; use .ppm or .svg")
    with open(path, "wb") as fh:
        fh.write(data)


def render_ppm(grid: RegionGrid, scale: int | None = None) -> bytes:
    scale = scale or _scale_for(grid)
    ny, nx = grid.colors.shape
    width = nx * scale
    legend_h = SWATCH + 4
    height = legend_h + ny * scale
    img = np.full((height, width, 3), 255, dtype=np.uint8)

    n = len(COLOR_CODES)
    slot = max(1, width // n)
    for k, code in enumerate(COLOR_CODES):
        img[2:2 + SWATCH, k * slot:min(width, k * slot + min(SWATCH, slot))] = COLORS[code][1]

    rgb = np.array([[COLORS[c][1] for c in row] for row in grid.colors[::-1]], dtype=np.uint8)
    img[legend_h:] = np.kron(rgb, np.ones((scale, scale, 1), dtype=np.uint8))

    xname, yname = _axis_names(grid)
    sp = grid.spec
    header = [
        "P6",
        f"# x={xname} range={sp.range_x[0]!r},{sp.range_x[1]!r}",
        f"# y={yname} range={sp.range_y[0]!r},{sp.range_y[1]!r}",
        f"# grid={nx}x{ny} scale={scale} legend_height={legend_h}",
        "# legend=" + ",".join(f"{c}:{COLORS[c][0]}" for c in COLOR_CODES),
        f"{width} {height}",
        "255",
    ]
    return ("\n".join(header) + "\n").encode("ascii") + img.tobytes()


def read_ppm_codes(path) -> np.ndarray:
    """Colour-code matrix (indexed ``[iy, ix]``, y up) decoded from a rendered PPM."""
    raw = Path(path).read_bytes()
    lines, pos = [], 0
    while len([ln for ln in lines if not ln.startswith(b"#")]) < 3:
        end = raw.index(b"\n", pos)
        lines.append(raw[pos:end])
        pos = end + 1
    meta = b"\n".join(lines).decode("ascii")
    nx, ny, scale, legend_h = map(int, re.search(
        r"grid=(\d+)x(\d+) scale=(\d+) legend_height=(\d+)", meta).groups())
    width, height = map(int, [ln for ln in lines if not ln.startswith(b"#")][1].split())
    img = np.frombuffer(raw[pos:], dtype=np.uint8).reshape(height, width, 3)
    lookup = {COLORS[c][1]: c for c in COLOR_CODES}
    centre = scale // 2
    codes = np.empty((ny, nx), dtype=object)
    for row in range(ny):
        for ix in range(nx):
            px = img[legend_h + row * scale + centre, ix * scale + centre]
            codes[ny - 1 - row, ix] = lookup[tuple(int(v) for v in px)]
    return codes


def _hex(rgb) -> str:
    return "#%02x%02x%02x" % rgb


def render_svg(grid: RegionGrid, scale: int | None = None) -> str:
    scale = scale or _scale_for(grid)
    ny, nx = grid.colors.shape
    sp = grid.spec
    xname, yname = _axis_names(grid)
    legend_h = LEGEND_ROW * ((len(COLOR_CODES) + 1) // 2) + 8
    map_w, map_h = nx * scale, ny * scale
    x0, y0 = MARGIN, legend_h + 10
    width = max(map_w + 2 * MARGIN, 2 * 260 + MARGIN)
    height = y0 + map_h + MARGIN

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11" '
        f'data-grid="{nx}x{ny}" data-scale="{scale}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        '<g id="legend">',
    ]
    for k, code in enumerate(COLOR_CODES):
        lx = MARGIN + (k % 2) * 260
        ly = 4 + (k // 2) * LEGEND_ROW
        out.append(f'<rect x="{lx}" y="{ly}" width="{SWATCH}" height="{SWATCH}" '
                   f'fill="{_hex(COLORS[code][1])}" stroke="#000000" stroke-width="0.5"/>')
        out.append(f'<text x="{lx + SWATCH + 4}" y="{ly + SWATCH - 2}">'
                   f'{escape(COLORS[code][0])}: {escape(LEGEND[code])}</text>')
    out.append("</g>")

    out.append(f'<g id="map" transform="translate({x0},{y0})" shape-rendering="crispEdges">')
    for iy in range(ny):
        row = grid.colors[iy]
        top = (ny - 1 - iy) * scale
        ix = 0
        while ix < nx:
            run = ix
            while run + 1 < nx and row[run + 1] == row[ix]:
                run += 1
            span = run - ix + 1
            out.append(f'<rect x="{ix * scale}" y="{top}" width="{span * scale}" height="{scale}" '
                       f'fill="{_hex(COLORS[row[ix]][1])}" data-code="{row[ix]}" '
                       f'data-iy="{iy}" data-ix="{ix}" data-span="{span}"/>')
            ix = run + 1
    out.append(f'<rect x="0" y="0" width="{map_w}" height="{map_h}" fill="none" stroke="#000000"/>')
    out.append("</g>")

    # axes: names and range end points
    out.append('<g id="axes">')
    out.append(f'<text x="{x0}" y="{y0 + map_h + 14}" text-anchor="middle">{sp.range_x[0]:g}</text>')
    out.append(f'<text x="{x0 + map_w}" y="{y0 + map_h + 14}" text-anchor="middle">{sp.range_x[1]:g}</text>')
    out.append(f'<text x="{x0 + map_w / 2:g}" y="{y0 + map_h + 30}" text-anchor="middle">{escape(xname)}</text>')
    out.append(f'<text x="{x0 - 6}" y="{y0 + map_h}" text-anchor="end">{sp.range_y[0]:g}</text>')
    out.append(f'<text x="{x0 - 6}" y="{y0 + 10}" text-anchor="end">{sp.range_y[1]:g}</text>')
    out.append(f'<text x="{x0 - 30}" y="{y0 + map_h / 2:g}" text-anchor="middle" '
               f'transform="rotate(-90 {x0 - 30} {y0 + map_h / 2:g})">{escape(yname)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def read_svg_codes(path) -> np.ndarray:
    text = Path(path).read_text()
    nx, ny = map(int, re.search(r'data-grid="(\d+)x(\d+)"', text).groups())
    codes = np.empty((ny, nx), dtype=object)
    for code, iy, ix, span in re.findall(
            r'data-code="(\w+)" data-iy="(\d+)" data-ix="(\d+)" data-span="(\d+)"', text):
        iy, ix, span = int(iy), int(ix), int(span)
        codes[iy, ix:ix + span] = code
    return codes

