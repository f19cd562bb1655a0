"""Command-line experiment runner.

Subcommands wrap the library modules one-to-one; every run reads a line
oriented ``key=value`` config file and writes CSV/JSON outputs that start
with (or embed) a canonical reproducibility header.  Identical configs
produce byte-identical outputs; timing information is only emitted when
explicitly requested since it would break that guarantee.

Exit codes: 0 ok, 2 validation error, 3 budget refusal, 4 invariant breach.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .errors import BudgetError, InvariantError, ValidationError
from . import congruence as cg
from . import digits as dg
from . import lifting as lf
from . import meanvalue as mv
from . import waring as wr

_SUBCOMMANDS = ("enumerate", "etstar", "count", "congruence", "lift", "waring", "fit")


# --- config handling --------------------------------------------------------

def parse_config_text(text: str) -> dict[str, str]:
    """Parse line-oriented key=value config; '#' starts a comment line."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno} is not key=value: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ValidationError(f"config line {lineno} has an empty key")
        if key in out:
            raise ValidationError(f"config key repeated: {key!r}")
        out[key] = value
    return out


def _escape(value: str) -> str:
    # ';' separates pairs in the canonical line, so it cannot appear raw in values
    return value.replace("%", "%25").replace(";", "%3B")


def _unescape(value: str) -> str:
    return value.replace("%3B", ";").replace("%25", "%")


def canonical_config(subcommand: str, cfg: dict[str, str]) -> str:
    """One-line canonical form used in reproducibility headers; lossless."""
    body = ";".join(f"{k}={_escape(cfg[k])}" for k in sorted(cfg))
    return f"{subcommand};{body}" if body else subcommand


def parse_canonical(text: str) -> tuple[str, dict[str, str]]:
    """Invert canonical_config; round-trips every config exactly."""
    subcommand, _, body = text.partition(";")
    cfg: dict[str, str] = {}
    if body:
        for part in body.split(";"):
            key, sep, value = part.partition("=")
            if not sep:
                raise ValidationError(f"malformed canonical fragment: {part!r}")
            cfg[key] = _unescape(value)
    return subcommand, cfg


def _require(cfg: dict[str, str], *keys: str) -> None:
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ValidationError(f"config is missing required keys: {', '.join(missing)}")


def _get_int(cfg: dict[str, str], key: str, default: int | None = None) -> int:
    if key not in cfg:
        if default is None:
            raise ValidationError(f"config is missing required key: {key}")
        return default
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ValidationError(f"config key {key} is not an integer: {cfg[key]!r}") from exc


def _get_int_list(cfg: dict[str, str], key: str) -> list[int]:
    _require(cfg, key)
    try:
        return [int(v) for v in cfg[key].split(",")]
    except ValueError as exc:
        raise ValidationError(f"config key {key} is not an integer list: {cfg[key]!r}") from exc


def _get_flag(cfg: dict[str, str], key: str, default: bool = False) -> bool:
    value = cfg.get(key)
    if value is None:
        return default
    if value in ("on", "1", "true"):
        return True
    if value in ("off", "0", "false"):
        return False
    raise ValidationError(f"config key {key} must be on/off, got {value!r}")


def _digit_set(cfg: dict[str, str]) -> dg.DigitSet:
    _require(cfg, "digitset")
    return dg.parse_digit_set(cfg["digitset"], strict=_get_flag(cfg, "strict", True))


def _source(cfg: dict[str, str]) -> dg.DigitSource:
    _require(cfg, "source")
    text = cfg["source"]
    if text == "squares":
        return dg.DigitSource.squares()
    if text.startswith("powers:"):
        return dg.DigitSource.powers(_parse_int(text.partition(":")[2], "source exponent"))
    if text.startswith("explicit:"):
        vals = text.partition(":")[2]
        return dg.DigitSource.explicit(
            [_parse_int(v, "source value") for v in vals.split(",")]
        )
    raise ValidationError(f"unknown source spec: {text!r}")


def _parse_int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ValidationError(f"{what} is not an integer: {text!r}") from exc


# --- output helpers ---------------------------------------------------------

def _fmt(value) -> str:
    """Deterministic CSV cell rendering; exact for ints, shortest repr for reals."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return repr(float(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_lines(path: Path, header: str, lines) -> None:
    with open(path, "w") as fh:
        fh.write(f"# config: {header}\n")
        for line in lines:
            fh.write(line + "\n")


def _write_csv(path: Path, header: str, columns: list[str], rows) -> None:
    rendered = [",".join(columns)]
    rendered += [",".join(_fmt(cell) for cell in row) for row in rows]
    _write_lines(path, header, rendered)


def _write_json(path: Path, header: str, payload: dict) -> None:
    payload = dict(payload)
    payload["config"] = header
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


# --- subcommands -------------------------------------------------------------

def _run_enumerate(cfg, out: Path, header: str, budget, workers) -> None:
    ds = _digit_set(cfg)
    bound = _get_int(cfg, "X")
    members = dg.iter_members(ds, bound)
    _write_lines(out / "enumerate.txt", header, (str(m) for m in members))


def _run_etstar(cfg, out: Path, header: str, budget, workers) -> None:
    source = _source(cfg)
    t = _get_int(cfg, "t")
    horizon = _get_int(cfg, "N")
    profile = dg.rep_profile(source, t, horizon)
    report = dg.et_star_report(profile)
    _write_csv(
        out / "etstar_windows.csv",
        header,
        ["window_start", "window_max"],
        report.windows,
    )
    _write_json(
        out / "etstar.json",
        header,
        {
            "t": t,
            "N": horizon,
            "max_count": report.max_count,
            "max_at": report.max_at,
            "slope": report.slope,
            "intercept": report.intercept,
        },
    )


def _run_count(cfg, out: Path, header: str, budget, workers) -> None:
    ds = _digit_set(cfg)
    s = _get_int(cfg, "s")
    k = _get_int(cfg, "k")
    bounds = _get_int_list(cfg, "X")
    method = cfg.get("method", "mitm")
    if method not in ("brute", "mitm"):
        raise ValidationError(f"method must be brute or mitm, got {method!r}")
    timing = _get_flag(cfg, "timing", False)
    system = mv.SpacedSystem.pure_powers(k, ds.base)
    rows = []
    for bound in bounds:
        members = list(dg.iter_members(ds, bound))
        if method == "brute":
            res = mv.brute_force_count(system, s, members, budget=budget, x_bound=bound)
        else:
            res = mv.mitm_count(
                system, s, members, budget=budget, workers=workers, x_bound=bound
            )
        seconds = repr(round(res.seconds, 6)) if timing else "NA"
        rows.append([bound, res.y, s, k, res.count, method, seconds])
    _write_csv(
        out / "count.csv", header, ["X", "Y", "s", "k", "count", "method", "seconds"], rows
    )
    if _get_flag(cfg, "histogram", False):
        if len(bounds) != 1:
            raise ValidationError("histogram output needs a single X")
        members = list(dg.iter_members(ds, bounds[0]))
        table = mv.multiplicity_table(
            system, s, members, budget=budget, workers=workers
        )
        hist_rows = [
            [mv.key_hex(key), table[key]] for key in sorted(table.keys())
        ]
        _write_csv(out / "histogram.csv", header, ["key_hex", "multiplicity"], hist_rows)


def _run_congruence(cfg, out: Path, header: str, budget, workers) -> None:
    task = cfg.get("task")
    ds = _digit_set(cfg)
    s = _get_int(cfg, "s")
    k = _get_int(cfg, "k")
    system = mv.SpacedSystem.pure_powers(k, ds.base)
    if task == "lambda":
        levels = _get_int_list(cfg, "B")
        rows = []
        for b_level in levels:
            bound = _get_int(cfg, "X", ds.base**b_level)
            weights = cg.WeightAssignment.unit(dg.iter_members(ds, bound))
            spec = cg.MeanValueSpec(system, weights, s, b_level, 0)
            rr = cg.restriction_ratio(spec, ds, budget=budget, workers=workers)
            rows.append(
                [b_level, rr.level, 0, s, k, rr.u_b, rr.u_bh, rr.ratio, "q^H"]
            )
            ratio_classes = rr.ratio_by_classes
            rows.append(
                [
                    b_level,
                    rr.level,
                    0,
                    s,
                    k,
                    rr.u_b,
                    rr.u_bh,
                    ratio_classes if ratio_classes is not None else "NA",
                    "classes",
                ]
            )
        _write_csv(
            out / "congruence_lambda.csv",
            header,
            ["B", "H", "h", "s", "k", "U_B", "U_BH", "ratio", "normalizer"],
            rows,
        )
        return
    if task == "K":
        b_level = _get_int(cfg, "B")
        t = _get_int(cfg, "t")
        a = _get_int(cfg, "a")
        b = _get_int(cfg, "b")
        r = _get_int(cfg, "r")
        nu = _get_int(cfg, "nu")
        deltas = _get_int_list(cfg, "delta") if "delta" in cfg else [0]
        bound = _get_int(cfg, "X", ds.base**b_level)
        weights = cg.WeightAssignment.unit(dg.iter_members(ds, bound))
        spec = cg.MeanValueSpec(system, weights, s, b_level, 0)
        k_value = cg.two_class_mean_value(spec, t, r, a, b, nu, budget=budget)
        level = -(-b_level // k)
        spec_h = cg.MeanValueSpec(system, weights, s, b_level, level)
        u_bh = cg.congruence_mean_value(spec_h, budget=budget, workers=workers)
        n_classes = len(cg.class_norms(weights, ds.base, level).table)
        rows = []
        for delta in deltas:
            if k >= 2 and 1 <= r <= k - 1 and u_bh > 0:
                k_tilde = cg.normalized_two_class(k_value, delta, r, k, u_bh, n_classes)
            else:
                k_tilde = "NA"
            rows.append([a, b, r, nu, k_value, k_tilde, delta])
        _write_csv(
            out / "congruence_k.csv",
            header,
            ["a", "b", "r", "nu", "K", "K_tilde", "delta"],
            rows,
        )
        return
    raise ValidationError("congruence task must be lambda or K")


def _run_lift(cfg, out: Path, header: str, budget, workers) -> None:
    task = cfg.get("task")
    ds = _digit_set(cfg)
    t = _get_int(cfg, "t")
    if task == "decompose":
        depth = _get_int(cfg, "d")
        bound = _get_int(cfg, "X")
        weights = lf.unit_tuple_weights(list(dg.iter_members(ds, bound)), t)
        dec = lf.carry_decomposition(ds.base, t, depth, weights, budget=budget)
        rows = [
            [":".join(str(v) for v in lam), dec.table[lam]]
            for lam in sorted(dec.table.keys())
        ]
        _write_csv(
            out / "lift_decomposition.csv", header, ["lambda_tuple", "contribution"], rows
        )
        return
    if task == "chain":
        spacing = _get_int(cfg, "c")
        b_level = _get_int(cfg, "B")
        psi = _get_int_list(cfg, "psi")
        bound = _get_int(cfg, "X")
        system = mv.SpacedSystem.perturbed(ds.base, spacing, [psi])
        members = list(dg.iter_members(ds, bound))
        pairs = lf.congruence_solution_pairs(system, t, members, b_level, budget=budget)
        chain = lf.lifting_chain(system, t, b_level, pairs)
        rows = [[st.j, st.c_j, st.verified] for st in chain.steps]
        _write_csv(out / "lift_chain.csv", header, ["j", "c_j", "verified"], rows)
        return
    raise ValidationError("lift task must be decompose or chain")


def _run_waring(cfg, out: Path, header: str, budget, workers) -> None:
    ds = _digit_set(cfg)
    s = _get_int(cfg, "s")
    k = _get_int(cfg, "k")
    bound = _get_int(cfg, "X")
    table = wr.representation_table(ds, s, k, bound, budget=budget)
    check = wr.cauchy_bound_check(table)
    rows = [[n, table.counts[n]] for n in sorted(table.counts)]
    _write_csv(out / "waring.csv", header, ["n", "R"], rows)
    _write_json(
        out / "waring.json",
        header,
        {
            "s": s,
            "k": k,
            "X": bound,
            "Y": table.y,
            "N": wr.represented_count(table),
            "sumR": table.total(),
            "sumR2": table.sum_squares(),
            "cauchy_lower_bound": float(check.lower_bound),
        },
    )


def _run_fit(cfg, out: Path, header: str, budget, workers) -> None:
    _require(cfg, "input")
    path = Path(cfg["input"])
    if not path.exists():
        raise ValidationError(f"fit input not found: {path}")
    points = []
    with open(path) as fh:
        columns: list[str] | None = None
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if columns is None:
                columns = line.split(",")
                for needed in ("X", "Y", "count"):
                    if needed not in columns:
                        raise ValidationError(f"fit input lacks column {needed!r}")
                continue
            cells = line.split(",")
            row = dict(zip(columns, cells))
            points.append(
                (
                    _parse_int(row["X"], "X"),
                    _parse_int(row["Y"], "Y"),
                    _parse_int(row["count"], "count"),
                )
            )
    fit = mv.fit_exponent(points)
    _write_json(
        out / "fit.json",
        header,
        {
            "n_points": len(points),
            "slope": fit.slope,
            "intercept": fit.intercept,
            "residual": fit.residual,
        },
    )


_RUNNERS = {
    "enumerate": _run_enumerate,
    "etstar": _run_etstar,
    "count": _run_count,
    "congruence": _run_congruence,
    "lift": _run_lift,
    "waring": _run_waring,
    "fit": _run_fit,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ellipsephic",
        description="Exact counting experiments over digit-restricted integer sets.",
    )
    parser.add_argument("subcommand", choices=_SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="path to a key=value config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--budget-tuples", type=int, default=mv.DEFAULT_BUDGET.max_tuples)
    args = parser.parse_args(argv)

    try:
        config_path = Path(args.config)
        if not config_path.exists():
            raise ValidationError(f"config file not found: {config_path}")
        cfg = parse_config_text(config_path.read_text())
        header = canonical_config(args.subcommand, cfg)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        budget = mv.Budget(max_tuples=args.budget_tuples)
        _RUNNERS[args.subcommand](cfg, out, header, budget, max(1, args.workers))
    except ValidationError as exc:
        print(f'error kind=validation msg="{exc}"', file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f'error kind=budget msg="{exc}"', file=sys.stderr)
        return 3
    except InvariantError as exc:
        print(f'error kind=invariant msg="{exc}"', file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
