"""Command-line front end.

Every command reads an optional flat ``key = value`` config file (``#``
comments allowed); ``--<key>`` flags override it. Exit codes: 0 success,
2 I/O or parse failure, 3 domain or configuration violation.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from qigsim.errors import ContractViolationError, InvalidConfigurationError, QigError

EXIT_OK = 0
EXIT_IO = 2
EXIT_DOMAIN = 3


class InputError(Exception):
    """Unreadable or malformed input file (exit 2)."""


def fmt(x) -> str:
    return format(float(x), ".12g")


# -- config documents ----------------------------------------------------------

def _floats(text):
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in text.replace(";", ",").split(",") if v.strip())


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise ValueError(f"{value} is not a 64-bit unsigned integer")
    return value


# key -> (parser, default); default None means optional/absent
SCHEMAS = {
    "metrics": {
        "input": (str, None), "imag": (str, None), "out_dir": (str, None),
    },
    "score": {
        "alpha": (float, None), "lambda1": (float, None), "E0": (float, 0.0), "E1": (float, 1.0),
    },
    "evolve": {
        "n": (int, None), "d": (int, 1), "eta": (float, 0.7), "lambda_decay": (float, 0.7),
        "steps": (int, 500), "seed": (_u64, 0), "snapshot_stride": (int, 25),
        "mask_path": (str, None), "state_source": (str, "random_bipartite"),
        "weights": (_floats, None), "energies": (_floats, None), "categories": (_ints, None),
        "out_dir": (str, "."),
    },
    "killweb": {
        "n": (int, 10), "d": (int, 1), "eta": (float, 0.7), "lambda_decay": (float, 0.7),
        "steps": (int, 500), "seed": (_u64, 0), "snapshot_stride": (int, 25),
        "state_source": (str, "blue_superposition"),
        "weights": (_floats, (0.25, 0.25, 0.25, 0.25)), "energies": (_floats, (0.0, 1.0, 2.0, 3.0)),
        "grid_points": (int, 11), "restarts": (int, 3), "max_rounds": (int, 10),
        "seeds": (int, 1), "out_dir": (str, "."),
    },
    "page": {
        "n": (int, 2), "d": (int, 2), "samples": (int, 10000), "seed": (_u64, 0),
    },
    "torus": {
        "lambda0": (float, None), "lambda1": (float, None), "E0": (float, 1.0), "E1": (float, 2.0),
        "steps": (int, 200), "t_max": (float, 2 * math.pi), "out_dir": (str, None),
    },
}


def read_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    doc = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise InputError(f"{path}:{lineno}: empty key")
        doc[key] = value
    return doc


def resolve(command, doc: dict) -> dict:
    """Typed parameters from raw strings; unknown keys and bad values are config violations."""
    schema = SCHEMAS[command]
    unknown = sorted(set(doc) - set(schema))
    if unknown:
        raise InvalidConfigurationError(f"unknown key(s) for {command}: {', '.join(unknown)}")
    params = {}
    for key, (parse, default) in schema.items():
        if key in doc and doc[key] is not None:
            try:
                params[key] = parse(doc[key]) if isinstance(doc[key], str) else doc[key]
            except ValueError as exc:
                raise InvalidConfigurationError(f"bad value for {key!r}: {exc}") from exc
        else:
            params[key] = default
    return params


def require(params, *keys):
    missing = [k for k in keys if params.get(k) is None]
    if missing:
        raise InvalidConfigurationError(f"missing required key(s): {', '.join(missing)}")


# -- matrix files -------------------------------------------------------------

def _parse_cell(cell, path, row, col, complex_ok):
    text = cell.strip().replace(" ", "")
    try:
        if complex_ok:
            return complex(text.replace("i", "j"))
        return float(text)
    except ValueError:
        raise InputError(f"{path}: line {row}, column {col}: cannot parse {cell!r}") from None


def read_matrix(path, complex_ok=True) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    rows = [(i, r) for i, r in enumerate(rows, 1) if any(c.strip() for c in r)]
    if not rows:
        raise InputError(f"{path}: empty matrix file")
    width = len(rows[0][1])
    data = []
    for lineno, r in rows:
        if len(r) != width:
            raise InputError(f"{path}: line {lineno}, column {min(len(r), width) + 1}: "
                             f"expected {width} columns, found {len(r)}")
        data.append([_parse_cell(c, path, lineno, j, complex_ok) for j, c in enumerate(r, 1)])
    return np.array(data, dtype=complex if complex_ok else float)


def write_matrix(path, M):
    M = np.real_if_close(np.asarray(M))
    with open(path, "w", newline="") as fh:
        for row in M:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")


def _joined(values):
    return ";".join(fmt(v) for v in values)


# -- commands -----------------------------------------------------------------

def cmd_metrics(p, out=None):
    from qigsim.quantum_state import coherence, entanglement_entropy, purity

    out = out or sys.stdout
    require(p, "input")
    M = read_matrix(p["input"], complex_ok=p["imag"] is None)
    if p["imag"] is not None:
        Im = read_matrix(p["imag"], complex_ok=False)
        if Im.shape != M.shape:
            raise InputError(f"real part {M.shape} and imaginary part {Im.shape} differ in shape")
        M = M + 1j * Im
    if M.shape[0] != M.shape[1]:
        raise ContractViolationError(f"density matrix must be square, got {M.shape}")
    herm = float(np.max(np.abs(M - M.conj().T)))
    row = {
        "purity": purity(M),
        "qee": entanglement_entropy(M),
        "coherence": coherence(M),
        "trace": float(np.trace(M).real),
        "hermiticity_residual": herm,
    }
    for k, v in row.items():
        print(f"{k}: {fmt(v)}", file=out)
    if p["out_dir"]:
        d = Path(p["out_dir"])
        d.mkdir(parents=True, exist_ok=True)
        write_rows(d / "metrics.csv", list(row), [list(row.values())])
    return row


def cmd_score(p, out=None):
    from qigsim.measurement import best_alignment, classical_expectation, rank1_operator

    out = out or sys.stdout
    require(p, "alpha", "lambda1")
    align = best_alignment(p["alpha"], p["lambda1"], p["E0"], p["E1"])
    classical = classical_expectation(p["lambda1"], rank1_operator(p["alpha"]))
    report = {"t_star": align.t_star, "quantum": align.qtv_max, "classical": classical,
              "gap": align.qtv_max - classical}
    for k, v in report.items():
        print(f"{k}: {fmt(v)}", file=out)
    return report


def _write_evolution(out_dir: Path, result):
    from qigsim.evolution import TraceRecord

    out_dir.mkdir(parents=True, exist_ok=True)
    write_rows(out_dir / "trace.csv", TraceRecord.FIELDS,
               [[str(r.t)] + [getattr(r, f) for f in TraceRecord.FIELDS[1:]] for r in result.records])
    write_matrix(out_dir / "H_best.csv", result.best.H)
    write_matrix(out_dir / "H_final.csv", result.final.H)
    for t, snap in result.trajectory:
        write_matrix(out_dir / f"H_{t}.csv", snap.H)


def _evolution_config(p, **extra):
    from qigsim.evolution import EvolutionConfig

    try:
        return EvolutionConfig(eta=p["eta"], lambda_decay=p["lambda_decay"], steps=p["steps"],
                               n=p["n"], d=p["d"], seed=p["seed"],
                               state_source=p["state_source"],
                               snapshot_stride=p["snapshot_stride"], **extra)
    except ValueError as exc:
        raise InvalidConfigurationError(str(exc)) from exc


def _report_run(result, out, prefix=""):
    print(f"{prefix}peak_two_norm: {fmt(result.peak_two_norm)} (t={result.best_step})", file=out)
    print(f"{prefix}final_two_norm: {fmt(result.final_two_norm)} (t={len(result.records) - 1})", file=out)


def cmd_evolve(p, out=None):
    from qigsim.evolution import EntangledProvider, StateSource, as_mask, evolve
    from qigsim.numkernel import RandomStream
    from qigsim.quantum_state import SuperpositionState

    out = out or sys.stdout
    require(p, "mask_path")
    K = read_matrix(p["mask_path"], complex_ok=False)
    K = as_mask(K)
    if p["n"] is None:
        p = dict(p, n=K.shape[0])
    config = _evolution_config(p)
    if K.shape[0] != config.n:
        raise InvalidConfigurationError(f"mask is {K.shape[0]}x{K.shape[0]} but n = {config.n}")
    provider = None
    if config.state_source is StateSource.BLUE_SUPERPOSITION:
        from qigsim.killweb import CategoryLayout, category_basis

        require(p, "weights", "energies", "categories")
        layout = CategoryLayout(p["categories"])
        if layout.n != config.n:
            raise InvalidConfigurationError(f"categories cover {layout.n} indices but n = {config.n}")
        state = SuperpositionState(p["weights"], p["energies"], category_basis(layout))
        basis, amps, E = state.basis, np.sqrt(state.weights), state.energies

        def wavefunction(t):
            return (amps * np.exp(-1j * E * np.asarray(t)[..., None])) @ basis.T

        provider = EntangledProvider(wavefunction, config.n, config.d, RandomStream(config.seed))
    result = evolve(config, K, provider)
    _write_evolution(Path(p["out_dir"]), result)
    _report_run(result, out)
    return result


def cmd_killweb(p, optimize=False, out=None):
    from qigsim.killweb import check_allocation, optimize_killweb, run_killweb
    from qigsim.qig import SearchConfig

    out = out or sys.stdout
    if p["seeds"] < 1:
        raise InvalidConfigurationError("seeds must be >= 1")
    if p["n"] != 10:
        raise InvalidConfigurationError(f"kill-web scenario has n = 10, got n = {p['n']}")
    check_allocation(p["weights"], 4)
    if len(p["energies"]) != 4:
        raise InvalidConfigurationError("kill-web needs 4 energies")
    base = _evolution_config(p)
    search = SearchConfig(grid_points=p["grid_points"], restarts=p["restarts"],
                          max_rounds=p["max_rounds"], seed=base.seed) if optimize else None
    out_dir = Path(p["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = []
    for k in range(p["seeds"]):
        seed = base.seed + k
        config = _evolution_config(dict(p, seed=seed))
        weights, energies = p["weights"], p["energies"]
        if optimize:
            found = optimize_killweb(config, SearchConfig(**{**search.__dict__, "seed": seed}))
            weights, energies = found.best_weights.values, found.best_energies
        result = run_killweb(config, weights, energies)
        run_dir = out_dir if p["seeds"] == 1 else out_dir / f"seed_{seed}"
        _write_evolution(run_dir, result.evolution)
        _report_run(result, out, prefix=f"seed {seed} ")
        summary.append([str(seed), result.peak_two_norm, str(result.best_step),
                        result.final_two_norm, _joined(weights), _joined(energies)])
    write_rows(out_dir / "summary.csv",
               ["seed", "peak_two_norm", "peak_step", "final_two_norm", "best_weights", "best_energies"],
               summary)
    return summary


def cmd_page(p, out=None):
    from qigsim.evolution import page_monte_carlo, page_mean_entropy
    from qigsim.numkernel import RandomStream

    out = out or sys.stdout
    if min(p["n"], p["d"], p["samples"]) < 1:
        raise InvalidConfigurationError("n, d and samples must be >= 1")
    mean, stderr = page_monte_carlo(p["n"], p["d"], p["samples"], RandomStream(p["seed"]))
    print(f"mean_entropy: {fmt(mean)}", file=out)
    print(f"standard_error: {fmt(stderr)}", file=out)
    print(f"page_formula: {fmt(page_mean_entropy(p['n'], p['d']))}", file=out)
    return mean, stderr


def cmd_torus(p, out=None):
    from qigsim.quantum_state import torus_coordinates

    out = out or sys.stdout
    require(p, "lambda0", "lambda1")
    if p["steps"] < 1 or p["t_max"] < 0:
        raise InvalidConfigurationError("steps must be >= 1 and t_max >= 0")
    t = np.linspace(0.0, p["t_max"], p["steps"])
    X, Y, Z = torus_coordinates(p["lambda0"], p["lambda1"], p["E0"], p["E1"], t)
    rows = np.column_stack([t, X, Y, Z])
    if p["out_dir"]:
        d = Path(p["out_dir"])
        d.mkdir(parents=True, exist_ok=True)
        write_rows(d / "torus.csv", ["t", "X", "Y", "Z"], rows)
    else:
        out.write("t,X,Y,Z\n")
        for row in rows:
            out.write(",".join(fmt(v) for v in row) + "\n")
    return rows


COMMANDS = {
    "metrics": cmd_metrics, "score": cmd_score, "evolve": cmd_evolve,
    "killweb": cmd_killweb, "page": cmd_page, "torus": cmd_torus,
}

HELP = {
    "metrics": "purity, entropy and coherence of a density-matrix CSV",
    "score": "quantum vs classical score against a rank-1 measurement",
    "evolve": "masked Hamiltonian evolution from a mask CSV",
    "killweb": "kill-web scenario (optionally optimized)",
    "page": "Monte Carlo mean entanglement entropy of random bipartite states",
    "torus": "torus point cloud of a two-component superposition",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="qigsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", help="flat key = value config file")
        if name == "metrics":
            sp.add_argument("input_path", nargs="?", help="density matrix CSV (a+bi cells, or real part)")
        if "out_dir" in schema:
            sp.add_argument("--out", dest="out_dir")
        if "snapshot_stride" in schema:
            sp.add_argument("--stride", dest="snapshot_stride")
        if name == "killweb":
            sp.add_argument("--optimize", action="store_true")
        for key in schema:
            if key == "out_dir" or key == "snapshot_stride":
                continue
            sp.add_argument(f"--{key.replace('_', '-')}", dest=key)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = read_config(args.config) if args.config else {}
        for key in SCHEMAS[args.command]:
            value = getattr(args, key, None)
            if value is not None:
                doc[key] = value
        if getattr(args, "input_path", None):
            doc["input"] = args.input_path
        params = resolve(args.command, doc)
        if args.command == "killweb":
            cmd_killweb(params, optimize=args.optimize)
        else:
            COMMANDS[args.command](params)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (QigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
