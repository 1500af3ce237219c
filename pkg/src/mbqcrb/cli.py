"""Command-line front end: verify the gate sets, run experiments, fit decays.

Configs are YAML key/value files; datasets are CSV with a commented metadata
preamble; fit reports are YAML. Angles in configs and reports are given in
units of pi, with the design's arccos(1/sqrt(3)) angle written symbolically.
All outputs embed the toolkit version and the full config, and are
byte-reproducible for a fixed seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, replace

import numpy as np
import yaml

from . import __version__
from .engine import (
    RBConfig,
    RBDataset,
    SequenceRecord,
    SpamModel,
    exact_sequence_fidelity,
    run_protocol,
    sequence_fidelity_estimate,
)
from .fitting import bootstrap_ci, fit_decay
from .gatesets import (
    CLIFFORD_ANGLE_TABLE,
    VerificationError,
    clifford_group,
    derandomized_design,
    pauli_group,
    verify_2design,
    verify_angle_table,
    verify_byproduct_bits,
    verify_design_reference,
)
from .wire import InstrumentConfig, NoiseModel

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

DESIGN_TOL = 1e-9
_ACOS_SQRT3 = float(np.arccos(1.0 / np.sqrt(3.0)))


@dataclass(frozen=True)
class ExperimentConfig:
    """Serializable mirror of an RBConfig plus output path and toggles."""

    rb: RBConfig
    output: str | None = None
    verify_first: bool = False


def format_angle_pi(theta: float) -> str:
    """Angle as a multiple of pi, or the symbolic design angle."""
    if abs(theta - _ACOS_SQRT3) < 1e-12:
        return "acos(1/sqrt3)"
    return repr(round(theta / np.pi, 12))


def _noise_to_dict(noise: NoiseModel) -> dict:
    d = {"kind": noise.kind}
    if noise.kind not in ("none", "composite"):
        d["strength"] = noise.strength
    d["placement"] = noise.placement
    if noise.parts:
        d["parts"] = [_noise_to_dict(p) for p in noise.parts]
    if noise.dependence is not None:
        raise ValueError("noise with a dependence map cannot be serialized")
    return d


def _noise_from_dict(d: dict) -> NoiseModel:
    kind = d.get("kind", "none")
    parts = tuple(_noise_from_dict(p) for p in d.get("parts", []))
    return NoiseModel(
        kind=kind,
        strength=float(d.get("strength", 0.0)),
        placement=d.get("placement", "after-each-gate-block"),
        parts=parts,
    )


def config_to_dict(config: ExperimentConfig) -> dict:
    rb = config.rb
    d = {
        "protocol": rb.protocol,
        "lengths": list(rb.lengths),
        "sequences_per_length": rb.sequences_per_length,
        "shots_per_sequence": rb.shots_per_sequence,
        "seed": rb.seed,
        "clifford_mode": rb.clifford_mode,
        "design_phis": [round(x / np.pi, 12) for x in rb.design_phis],
        "noise": _noise_to_dict(rb.noise),
        "instrument": {
            "bias": rb.instrument.bias,
            "inject_randomness": rb.instrument.inject_randomness,
        },
        "spam": {"prep_shrink": rb.spam.prep_shrink, "effect_bias": rb.spam.effect_bias},
        "verify_first": config.verify_first,
    }
    if rb.noise_inv is not None:
        d["noise_inv"] = _noise_to_dict(rb.noise_inv)
    if config.output is not None:
        d["output"] = config.output
    return d


def config_from_dict(d: dict) -> ExperimentConfig:
    required = ("protocol", "lengths", "sequences_per_length", "shots_per_sequence")
    missing = [k for k in required if k not in d]
    if missing:
        raise ValueError(f"config is missing required keys: {', '.join(missing)}")
    instrument = d.get("instrument", {})
    spam = d.get("spam", {})
    rb = RBConfig(
        protocol=d["protocol"],
        lengths=tuple(d["lengths"]),
        sequences_per_length=int(d["sequences_per_length"]),
        shots_per_sequence=int(d["shots_per_sequence"]),
        noise=_noise_from_dict(d.get("noise", {"kind": "none"})),
        noise_inv=_noise_from_dict(d["noise_inv"]) if "noise_inv" in d else None,
        instrument=InstrumentConfig(
            bias=float(instrument.get("bias", 0.0)),
            inject_randomness=bool(instrument.get("inject_randomness", False)),
        ),
        spam=SpamModel(
            prep_shrink=float(spam.get("prep_shrink", 1.0)),
            effect_bias=float(spam.get("effect_bias", 0.0)),
        ),
        seed=int(d.get("seed", 0)),
        design_phis=tuple(float(x) * np.pi for x in d.get("design_phis", [0.0, 0.0])),
        clifford_mode=d.get("clifford_mode", "coset"),
    )
    return ExperimentConfig(
        rb=rb, output=d.get("output"), verify_first=bool(d.get("verify_first", False))
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} does not hold a key/value mapping")
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# dataset and report files
# ---------------------------------------------------------------------------

_DATASET_MAGIC = "mbqcrb-dataset-v1"
_DATASET_FIELDS = ("s", "sequence_index", "survivals", "shots", "gate_digest")


def write_dataset(dataset: RBDataset, path: str, output_name: str | None = None):
    config = ExperimentConfig(rb=dataset.config, output=output_name)
    buf = io.StringIO()
    buf.write(f"# {_DATASET_MAGIC}\n")
    buf.write(f"# version: {__version__}\n")
    buf.write(f"# config: {json.dumps(config_to_dict(config), sort_keys=True)}\n")
    buf.write(f"# warnings: {json.dumps(list(dataset.warnings))}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_DATASET_FIELDS)
    for r in dataset.records:
        writer.writerow([r.s, r.index, r.survivals, r.shots, r.digest])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_dataset(path: str) -> RBDataset:
    """Load a dataset CSV; drawn gate indices are not stored, only digests."""
    meta = {}
    body = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                text = line[1:].strip()
                if ":" in text:
                    key, _, value = text.partition(":")
                    meta[key.strip()] = value.strip()
            elif line.strip():
                body.append(line)
    rows = list(csv.reader(body))
    if not rows or tuple(rows[0]) != _DATASET_FIELDS:
        raise ValueError(f"{path} is not a recognized dataset file")
    if "config" not in meta:
        raise ValueError(f"{path} has no embedded config")
    config = config_from_dict(json.loads(meta["config"]))
    warnings = tuple(json.loads(meta.get("warnings", "[]")))
    records = tuple(
        SequenceRecord(
            s=int(r[0]),
            index=int(r[1]),
            gate_indices=(),
            survivals=int(r[2]),
            shots=int(r[3]),
            digest=r[4],
        )
        for r in rows[1:]
    )
    return RBDataset(config=config.rb, records=records, warnings=warnings)


def write_fit_report(path: str, report: dict):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# mbqcrb-fit-v1\n")
        yaml.safe_dump(report, fh, sort_keys=False)


def write_curve_table(path: str, rows, report_meta: dict):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# mbqcrb-curve-v1\n")
        fh.write(f"# version: {__version__}\n")
        fh.write(f"# config: {json.dumps(report_meta, sort_keys=True)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["s", "mean", "stderr", "model"])
        for row in rows:
            writer.writerow(row)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _verify_checks(corrupt_table: bool = False, pauli_design: bool = False):
    """The verification suite; hooks deliberately corrupt it for testing."""
    table = dict(CLIFFORD_ANGLE_TABLE)
    if corrupt_table:
        table["H"] = (0, 0, 1)

    def check_table():
        devs = verify_angle_table(table)
        return f"24/24 rows, max deviation {max(devs.values()):.2e}"

    def check_reference():
        devs = verify_design_reference()
        return f"max deviation {max(devs.values()):.2e}"

    def check_clifford_design():
        gates = [e.unitary for e in clifford_group()]
        if not verify_2design(gates, DESIGN_TOL):
            raise VerificationError("Clifford set failed the 2-design diagnostics")
        return f"frame potential and twirl within {DESIGN_TOL:.0e}"

    def check_derandomized_design():
        gates = list(pauli_group()) if pauli_design else list(derandomized_design().elements)
        if not verify_2design(gates, DESIGN_TOL):
            raise VerificationError("derandomized set failed the 2-design diagnostics")
        return f"{len(gates)} elements within {DESIGN_TOL:.0e}"

    def check_byproducts():
        worst = verify_byproduct_bits()
        return f"512/512 cases, max deviation {worst:.2e}"

    return [
        ("clifford-angle-table", check_table),
        ("design-reference-matrices", check_reference),
        ("clifford-2design", check_clifford_design),
        ("derandomized-2design", check_derandomized_design),
        ("byproduct-bits", check_byproducts),
    ]


def cmd_verify(args) -> int:
    failed = []
    for name, check in _verify_checks(args.corrupt_angle_table, args.pauli_design):
        try:
            detail = check()
            if not args.quiet:
                print(f"PASS {name}: {detail}")
        except (VerificationError, ValueError) as exc:
            failed.append(name)
            print(f"FAIL {name}: {exc}")
    if failed:
        print(f"verification failed: {', '.join(failed)}")
        return EXIT_VALIDATION
    if not args.quiet:
        angles = ", ".join(format_angle_pi(t) for t in derandomized_design().angles)
        print(f"design pattern angles (pi units): {angles}")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, yaml.YAMLError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    rb = config.rb
    if args.seed is not None:
        rb = replace(rb, seed=args.seed)
    if config.verify_first:
        for name, check in _verify_checks():
            try:
                check()
            except (VerificationError, ValueError) as exc:
                print(f"FAIL {name}: {exc}", file=sys.stderr)
                return EXIT_VALIDATION
    try:
        dataset = run_protocol(rb, threads=args.threads)
    except ValueError as exc:
        print(f"invalid experiment: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    out = args.out or config.output or "dataset.csv"
    try:
        write_dataset(dataset, out, output_name=config.output)
    except OSError as exc:
        print(f"cannot write dataset: {exc}", file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        for warning in dataset.warnings:
            print(f"warning: {warning}")
        print(f"wrote {len(dataset.records)} records to {out}")
    return EXIT_OK


def _fit_points(dataset: RBDataset):
    return [
        (s, *sequence_fidelity_estimate(dataset, s)) for s in dataset.lengths()
    ]


def cmd_fit(args) -> int:
    try:
        dataset = read_dataset(args.dataset)
    except OSError as exc:
        print(f"cannot read dataset: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"invalid dataset: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    points = _fit_points(dataset)
    try:
        fit = fit_decay(points)
    except ValueError as exc:
        print(f"cannot fit: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    ci = None
    if args.resamples > 0:
        rng = np.random.Generator(
            np.random.Philox(
                np.random.SeedSequence((dataset.config.seed & 0xFFFFFFFFFFFFFFFF, 0xB007, args.resamples))
            )
        )
        ci = bootstrap_ci(dataset, args.resamples, rng)

    report = {
        "version": __version__,
        "protocol": dataset.config.protocol,
        "seed": dataset.config.seed,
        "lengths": list(dataset.lengths()),
        "a0": fit.a0,
        "b0": fit.b0,
        "p": fit.p,
        "avg_fidelity": fit.avg_fidelity,
        "residual_norm": fit.residual_norm,
        "ci_p": list(ci) if ci is not None else None,
        "resamples": args.resamples,
        "degenerate": fit.degenerate,
        "clamped": fit.clamped,
        "config": config_to_dict(ExperimentConfig(rb=dataset.config)),
        "warnings": list(dataset.warnings),
    }
    out = args.out or args.dataset + ".fit.yaml"
    curve_out = out + ".curve.csv"
    curve_rows = [
        (s, mean, stderr, fit.a0 * fit.p**s + fit.b0) for s, mean, stderr in points
    ]
    try:
        write_fit_report(out, report)
        write_curve_table(curve_out, curve_rows, report["config"])
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        print(f"p = {fit.p:.6f}, avg_fidelity = {fit.avg_fidelity:.6f}")
        if ci is not None:
            print(f"p 95% bootstrap CI: [{ci[0]:.6f}, {ci[1]:.6f}]")
        print(f"wrote {out} and {curve_out}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        config = load_config(args.config)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, yaml.YAMLError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    rb = config.rb
    try:
        exact = exact_sequence_fidelity(
            rb.protocol,
            args.length,
            noise=rb.noise,
            spam=rb.spam,
            noise_inv=rb.noise_inv,
            bias=rb.instrument.bias,
            clifford_mode=rb.clifford_mode,
            design_phis=rb.design_phis,
        )
    except ValueError as exc:
        print(f"cannot enumerate: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"protocol: {rb.protocol}")
    print(f"s: {args.length}")
    print(f"enumerated: {exact.enumerated!r}")
    print(f"analytic: {exact.analytic!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbqcrb",
        description="Randomized benchmarking on linear cluster-state wires",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run the gate-set verification suite")
    p_verify.add_argument("--corrupt-angle-table", action="store_true", help=argparse.SUPPRESS)
    p_verify.add_argument("--pauli-design", action="store_true", help=argparse.SUPPRESS)
    p_verify.set_defaults(func=cmd_verify)

    p_run = sub.add_parser("run", help="run a benchmarking experiment")
    p_run.add_argument("--config", required=True, help="YAML experiment config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="dataset output path")
    p_run.add_argument("--threads", type=int, default=1, help="worker threads")
    p_run.set_defaults(func=cmd_run)

    p_fit = sub.add_parser("fit", help="fit the decay model to a dataset")
    p_fit.add_argument("dataset", help="dataset CSV produced by run")
    p_fit.add_argument("--out", default=None, help="fit report output path")
    p_fit.add_argument(
        "--resamples", type=int, default=200, help="bootstrap resamples (0 disables)"
    )
    p_fit.set_defaults(func=cmd_fit)

    p_oracle = sub.add_parser("oracle", help="exact sequence fidelity at small length")
    p_oracle.add_argument("--config", required=True, help="YAML experiment config")
    p_oracle.add_argument("--length", type=int, required=True, help="sequence length")
    p_oracle.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
