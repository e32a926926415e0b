"""
Plain-text dumps: a format line (``fgrid v1``, ``vfield v1``, ...), then
``key=value`` header lines, then whitespace-separated data rows with
17 significant digits. ``section=<name>`` lines split multi-block dumps.
"""
import json
import logging

import numpy as np

from dif_estimator import constants
from dif_estimator.constants import SamplerTag
from dif_estimator.covariance import make_covariance
from dif_estimator.deformations import make_deformation
from dif_estimator.dilatation import DilatationField
from dif_estimator.exceptions import ConfigValidationError
from dif_estimator.grid import FieldSample, GridSpec
from dif_estimator.bergman import HolomorphicPoly
from dif_estimator.utils import format_float

logger = logging.getLogger(__name__)

FGRID = "fgrid v1"
VFIELD = "vfield v1"
DFIELD = "dfield v1"
QCMAP = "qcmap v1"
POLY = "poly v1"
RMAP = "rmap v1"


class DumpFormatError(ConfigValidationError):
    pass


def _format_row(*values):
    return " ".join(format_float(value) for value in values)


def _header(name, value):
    if isinstance(value, (dict, list)):
        value = json.dumps(value, sort_keys=True)
    elif isinstance(value, complex):
        value = f"{format_float(value.real)} {format_float(value.imag)}"
    elif isinstance(value, float):
        value = format_float(value)
    elif isinstance(value, (tuple, np.ndarray)):
        value = " ".join(format_float(v) for v in value)
    return f"{name}={value}"


def _render(kind, headers, rows):
    lines = [kind]
    lines.extend(_header(name, value) for name, value in headers.items() if value is not None)
    lines.extend(rows)
    return "\n".join(lines) + "\n"


def _complex_rows(points, values):
    return [
        _format_row(z.real, z.imag, v.real, v.imag)
        for z, v in zip(np.ravel(points), np.ravel(values))
    ]


def _real_rows(points, values):
    return [_format_row(z.real, z.imag, v) for z, v in zip(np.ravel(points), np.ravel(values))]


def parse_dump(text, kind):
    """
    :return: (headers dict, {section name: rows array}); rows before any
        ``section=`` line go to section ``""``
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != kind:
        raise DumpFormatError(f"expected a '{kind}' dump, found {lines[0] if lines else 'nothing'!r}")
    headers, sections, current = {}, {"": []}, ""
    for line in lines[1:]:
        if "=" in line:
            name, value = line.split("=", 1)
            if name == "section":
                current = value
                sections.setdefault(current, [])
            else:
                headers[name] = value
            continue
        try:
            sections[current].append([float(v) for v in line.split()])
        except ValueError as e:
            raise DumpFormatError(f"malformed data row {line!r} in '{kind}' dump") from e
    return headers, {name: np.array(rows, dtype=float) for name, rows in sections.items()}


def _floats(value):
    return tuple(float(v) for v in value.split())


def _complex(value):
    real, imag = _floats(value)
    return complex(real, imag)


def _require(headers, *names):
    missing = [name for name in names if name not in headers]
    if missing:
        raise DumpFormatError(f"dump is missing header(s): {', '.join(missing)}")


def dump_fgrid(sample):
    grid = sample.grid
    points = grid.points()
    headers = {
        "n": grid.n,
        "domain": grid.domain,
        "margin": grid.margin,
        "seed": sample.seed,
        "sampler": sample.sampler.value,
        "model": sample.provenance.get("model"),
        "deformation": sample.provenance.get("deformation"),
    }
    return _render(FGRID, headers, _real_rows(points, sample.values))


def parse_fgrid(text):
    headers, sections = parse_dump(text, FGRID)
    _require(headers, "n", "domain", "margin", "seed", "sampler")
    grid = GridSpec(
        n=int(headers["n"]),
        domain=_floats(headers["domain"]),
        margin=int(headers["margin"]),
    )
    rows = sections[""]
    if rows.shape != (grid.size, 3):
        raise DumpFormatError(f"{len(rows)} rows for a grid of {grid.size} points")
    provenance = {
        name: json.loads(headers[name]) for name in ("model", "deformation") if name in headers
    }
    model = make_covariance(provenance["model"]) if "model" in provenance else None
    deformation = None
    if "deformation" in provenance:
        deformation = make_deformation(provenance["deformation"])
    return FieldSample(
        grid=grid,
        values=rows[:, 2].reshape(grid.shape),
        seed=int(headers["seed"]),
        sampler=SamplerTag(headers["sampler"]),
        model=model,
        deformation=deformation,
        provenance=provenance,
    )


def dump_vfield(variations, direction, direction_vector):
    headers = {
        "n": variations.n,
        "b": float(variations.b),
        "alpha": float(variations.alpha),
        "h": f"{direction_vector[0]} {direction_vector[1]}",
        "kernel": variations.kernel,
    }
    xs, ys = variations.xs, variations.ys
    points = xs[np.newaxis, :] + 1j * ys[:, np.newaxis]
    return _render(VFIELD, headers, _real_rows(points, variations.values[direction]))


def dump_dfield(dilatation, name, provenance=None):
    """One field of a DilatationField: ``mu``, ``tau`` or ``dmu`` (complex d mu)."""
    headers = {
        "n": dilatation.n,
        "b": None if dilatation.b is None else float(dilatation.b),
        "alpha": None if dilatation.alpha is None else float(dilatation.alpha),
        "kernel": dilatation.kernel,
        "source": dilatation.source,
        "field": name,
    }
    headers.update(provenance or {})
    if name == "tau":
        rows = _real_rows(dilatation.points, dilatation.tau)
    elif name == "mu":
        rows = _complex_rows(dilatation.points, dilatation.mu)
    elif name == "dmu":
        rows = _complex_rows(dilatation.points, dilatation.complex_derivative())
    else:
        raise ValueError(f"unknown dilatation field {name!r}")
    return _render(DFIELD, headers, rows)


def _lattice(rows):
    xs = np.unique(rows[:, 0])
    ys = np.unique(rows[:, 1])
    if len(xs) * len(ys) != len(rows):
        raise DumpFormatError("dfield rows do not form a full lattice")
    return xs, ys


def parse_dfield(mu_text, tau_text=None):
    headers, sections = parse_dump(mu_text, DFIELD)
    if headers.get("field") != "mu":
        raise DumpFormatError(f"expected field=mu, found field={headers.get('field')}")
    rows = sections[""]
    xs, ys = _lattice(rows)
    shape = (len(ys), len(xs))
    mu = (rows[:, 2] + 1j * rows[:, 3]).reshape(shape)
    tau = np.zeros(shape)
    if tau_text is not None:
        tau_headers, tau_sections = parse_dump(tau_text, DFIELD)
        if tau_headers.get("field") != "tau":
            raise DumpFormatError("second dfield dump must hold field=tau")
        tau = tau_sections[""][:, 2].reshape(shape)

    def optional(name, cast):
        return cast(headers[name]) if name in headers else None

    return DilatationField(
        xs=xs,
        ys=ys,
        mu=mu,
        tau=tau,
        mask=np.zeros(shape, dtype=bool),
        n=optional("n", int),
        b=optional("b", float),
        kernel=headers.get("kernel"),
        alpha=optional("alpha", float),
        source=headers.get("source", "estimated"),
    )


def dump_qcmap(qcmap, count=constants.FORWARD_TABLE_POINTS):
    offsets = np.linspace(-qcmap.radius, qcmap.radius, count)
    lattice = qcmap.center + offsets[np.newaxis, :] + 1j * offsets[:, np.newaxis]
    inside = lattice[np.abs(lattice - qcmap.center) <= qcmap.radius * (1 - 1e-9)]
    radii, angles, table = qcmap.inverse_table
    disk = radii[:, np.newaxis] * np.exp(1j * angles[np.newaxis, :])
    headers = {
        "center": qcmap.center,
        "radius": qcmap.radius,
        "M": qcmap.resolution,
        "k": float(qcmap.k),
        "riemann_degree": qcmap.riemann.degree,
        "boundary_error": float(qcmap.riemann.boundary_error),
        "iterations": qcmap.plane.iterations,
    }
    rows = ["section=forward"]
    rows.extend(_complex_rows(inside, qcmap(inside)))
    rows.append("section=inverse")
    rows.extend(_complex_rows(disk, table))
    return _render(QCMAP, headers, rows)


def parse_qcmap(text):
    """Header values plus the forward and inverse sample tables."""
    headers, sections = parse_dump(text, QCMAP)
    _require(headers, "center", "radius", "M", "k")
    tables = {
        name: (rows[:, 0] + 1j * rows[:, 1], rows[:, 2] + 1j * rows[:, 3])
        for name, rows in sections.items()
        if name and len(rows)
    }
    summary = {
        "center": _complex(headers["center"]),
        "radius": float(headers["radius"]),
        "M": int(headers["M"]),
        "k": float(headers["k"]),
    }
    return summary, tables


def dump_poly(poly):
    headers = {
        "degree": poly.degree,
        "center": complex(poly.center),
        "scale": float(poly.scale),
    }
    rows = [_format_row(k, c.real, c.imag) for k, c in enumerate(poly.coefficients)]
    return _render(POLY, headers, rows)


def parse_poly(text):
    headers, sections = parse_dump(text, POLY)
    _require(headers, "degree")
    rows = sections[""]
    if len(rows) != int(headers["degree"]) + 1:
        raise DumpFormatError(f"degree={headers['degree']} with {len(rows)} coefficient rows")
    return HolomorphicPoly(
        rows[:, 1] + 1j * rows[:, 2],
        center=_complex(headers["center"]) if "center" in headers else 0j,
        scale=float(headers.get("scale", 1.0)),
    )


def dump_rmap(reconstructed, provenance=None, metrics=None):
    points = reconstructed.evaluation_grid()
    headers = {
        "center": reconstructed.center,
        "radius": reconstructed.radius,
        "eval_fraction": float(reconstructed.eval_fraction),
        "provenance": reconstructed.provenance,
    }
    headers.update(provenance or {})
    headers.update(metrics or {})
    return _render(RMAP, headers, _complex_rows(points, reconstructed(points)))


def parse_rmap(text):
    headers, sections = parse_dump(text, RMAP)
    rows = sections[""]
    return headers, rows[:, 0] + 1j * rows[:, 1], rows[:, 2] + 1j * rows[:, 3]


def dump_polylines(polylines, headers=None):
    """Blocks of ``x y`` rows, one ``section=`` per polyline."""
    rows = []
    for name, points in polylines:
        rows.append(f"section={name}")
        rows.extend(_format_row(z.real, z.imag) for z in np.ravel(points))
    return _render("polyline v1", headers or {}, rows)
