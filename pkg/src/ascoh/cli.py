"""Command-line interface: compute, predict, verify, search, selftest.

Exit codes: 0 success, 1 mismatch / failed verification, 2 usage or config
error (including violated verification hypotheses), 3 field-too-small or
precision-exhausted.
"""

from __future__ import annotations

import functools
import json
import sys

import click

from . import pipeline
from .errors import AscohError, ConfigError, FieldTooSmall, PrecisionExhausted


def _load_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _emit(lines, out):
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _json_line(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=True)


def _kv_lines(pairs):
    width = max(len(k) for k, _ in pairs)
    return [f"{k:<{width}}  {v}" for k, v in pairs]


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (FieldTooSmall, PrecisionExhausted) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(2)
        except AscohError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
def main():
    """Exact de Rham cohomology of double covers in characteristic 2."""


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--field", default=None, help="field override, e.g. 3 or 3:0xb")
@click.option("--n", type=int, default=None, help="pole-bound override")
@click.option("--format", "fmt", type=click.Choice(["human", "jsonl"]),
              default="human")
@click.option("--dump-module", is_flag=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_handle_errors
def compute(config, field, n, fmt, dump_module, out):
    """Compute all invariants of the curve in CONFIG."""
    curve, cfg, _ = pipeline.load_curve(_load_text(config), field=field)
    report = pipeline.compute_report(
        curve, name=cfg.name, n=n, dump_module=dump_module
    )
    if fmt == "jsonl":
        _emit([_json_line(report)], out)
        return
    pairs = [
        ("name", report["name"] or "(unnamed)"),
        ("field", report["field"]),
        ("genus", report["genus"]),
        ("p-rank", report["p_rank"]),
        ("local rank", report["local_rank"]),
        ("breaks", "; ".join(str(b) for b in report["breaks"])),
        ("a^r", " ".join(str(a) for a in report["a_numbers"])),
        ("V-type", "(" + ", ".join(str(c) for c in report["v_type"]) + ")"),
        ("k[V]", report["kv_decomposition"]),
        ("final type", "[" + ", ".join(str(v) for v in report["final_type"]) + "]"),
    ]
    lines = _kv_lines(pairs)
    if dump_module:
        for key in ("F", "V", "gram"):
            lines.append(f"{key}:")
            lines.extend("  " + row for row in report["module"][key])
    _emit(lines, out)


@main.command()
@click.option("--mode", required=True,
              type=click.Choice(["ordinary", "2n1", "ss-vtype", "bounds"]))
@click.option("--d", type=int, default=None)
@click.option("--gx", type=int, default=0)
@click.option("--fx", type=int, default=0)
@click.option("--breaks", default=None, help="comma-separated odd breaks")
@click.option("--ax", default=None, help="comma-separated higher a-numbers")
@click.option("--mu", type=int, default=None)
@click.option("--max-perps", type=int, default=2)
@click.option("--max-exp", type=int, default=3)
@click.option("--format", "fmt", type=click.Choice(["human", "jsonl"]),
              default="human")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_handle_errors
def predict(mode, d, gx, fx, breaks, ax, mu, max_perps, max_exp, fmt, out):
    """Closed-form predictions and bound tables from ramification data."""
    parse = lambda s: tuple(int(v) for v in s.split(",")) if s else None
    report = pipeline.predict(
        mode, d=d, g_x=gx, f_x=fx, breaks=parse(breaks), a_x=parse(ax),
        mu=mu, max_perps=max_perps, max_exp=max_exp,
    )
    if mode == "bounds":
        rows = report["rows"]
        if fmt == "jsonl":
            _emit([_json_line(r) for r in rows], out)
            return
        header = f"{'word':<12} {'phi':>4} {'L':>4} {'U':>4}"
        lines = [header, "-" * len(header)]
        lines += [
            f"{r['word']:<12} {r['phi']:>4} {r['L']:>4} {r['U']:>4}"
            for r in rows
        ]
        _emit(lines, out)
        return
    if fmt == "jsonl":
        _emit([_json_line(report)], out)
        return
    if mode == "ss-vtype":
        lines = []
        for s in report["strata"]:
            vt = "(" + ", ".join(str(c) for c in s["v_type"]) + ")"
            lines.append(f"mu={s['mu']}  codim={s['codim']}  V-type={vt}")
        _emit(lines, out)
        return
    ft = "[" + ", ".join(str(v) for v in report["final_type"]) + "]"
    _emit([f"final type  {ft}"], out)


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", required=True,
              type=click.Choice(["ordinary", "2n1", "ss-vtype", "bounds"]))
@click.option("--field", default=None)
@click.option("--n", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["human", "jsonl"]),
              default="human")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_handle_errors
def verify(config, mode, field, n, fmt, out):
    """Check a computed cover against the applicable prediction."""
    curve, _, _ = pipeline.load_curve(_load_text(config), field=field)
    report = pipeline.verify(curve, mode, n=n)
    if fmt == "jsonl":
        _emit([_json_line(report)], out)
    else:
        pairs = [(k, report[k]) for k in report]
        _emit(_kv_lines([(k, str(v)) for k, v in pairs]), out)
    if report["status"] == "hypothesis-violation":
        sys.exit(2)
    if report["status"] != "pass":
        sys.exit(1)


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--d", type=int, required=True)
@click.option("--count", type=int, default=100)
@click.option("--seed", type=int, default=0)
@click.option("--field", default=None)
@click.option("--format", "fmt", type=click.Choice(["human", "jsonl"]),
              default="jsonl")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_handle_errors
def search(config, d, count, seed, field, fmt, out):
    """Sample covers of the base in CONFIG over the reduced coefficient
    space and tabulate final-type frequencies."""
    base, _, _ = pipeline.load_curve(_load_text(config), field=field)
    report = pipeline.search(base, d, count, seed)
    if fmt == "jsonl":
        lines = [_json_line({"seed": seed, "d": d, "field": report["field"]})]
        lines += [_json_line(r) for r in report["records"]]
        lines += [_json_line({"frequencies": report["frequencies"]})]
        _emit(lines, out)
        return
    lines = [f"seed {seed}, d={d}, {count} covers over {report['field']}"]
    for row in report["frequencies"]:
        ft = "[" + ", ".join(str(v) for v in row["final_type"]) + "]"
        lines.append(f"{row['count']:>6}  {ft}")
    _emit(lines, out)


@main.command()
@click.option("--quick", is_flag=True)
@_handle_errors
def selftest(quick):
    """Run the built-in invariant suite."""
    report = pipeline.selftest(quick=quick)
    for chk in report["checks"]:
        line = f"{chk['status']:>4}  {chk['check']}"
        if chk["status"] != "pass":
            line += f"  ({chk['error']})"
        click.echo(line)
    if report["status"] != "pass":
        sys.exit(1)


if __name__ == "__main__":
    main()
