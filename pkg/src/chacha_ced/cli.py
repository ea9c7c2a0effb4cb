"""Command-line entry point.

Exit status: 0 success, 1 a verification or coverage expectation failed,
2 usage error.  Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .arx_core import Word
from .ced import InputParities, Scheme, check_classic, check_gbpp
from .chacha import CipherParams, NonceLayout, encrypt, encrypt_checked
from .fault import (
    CampaignConfig, ErrorPolicy, InputPolicy, classify_report, parse_signals, run_campaign,
)
from .gate_model import count
from .identities import run_all
from .quarterround import DEFAULT_SCHEDULE, FaultSpec, Signal, quarterround

log = logging.getLogger("chacha_ced")

JOBS_ENV = "CHACHA_CED_JOBS"


class UsageError(Exception):
    pass


def _hex_bytes(text: str) -> bytes:
    s = text.strip().lower().replace(":", "").replace(" ", "")
    if s.startswith("0x"):
        s = s[2:]
    try:
        return bytes.fromhex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a hex string: {text!r}")


def _schedule(text: str) -> tuple:
    try:
        parts = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"schedule must be four comma-separated integers, got {text!r}")
    if len(parts) != 4 or any(p < 0 for p in parts):
        raise argparse.ArgumentTypeError("schedule must be four non-negative integers")
    return parts


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV)
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring non-integer %s=%r", JOBS_ENV, raw)
        return 1


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


# ---- subcommands ----

def cmd_encrypt(args) -> int:
    try:
        params = CipherParams(args.key, args.nonce, args.rounds, NonceLayout(args.layout))
    except ValueError as exc:
        raise UsageError(str(exc))
    data = open(args.input, "rb").read() if args.input else sys.stdin.buffer.read()
    if args.check:
        out, report = encrypt_checked(params, args.counter, data, Scheme(args.check))
        dirty = 0
        for ctr, verdicts in report:
            for i, v in enumerate(verdicts):
                dirty += v.detected
                sys.stderr.write(json.dumps({"counter": ctr, "qr": i, **v.to_dict()}, sort_keys=True) + "\n")
    else:
        out = encrypt(params, args.counter, data)
        dirty = 0
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(out)
    else:
        sys.stdout.buffer.write(out)
        sys.stdout.buffer.flush()
    return 1 if dirty else 0


def _parse_fault(text: str, width: int) -> FaultSpec:
    if "=" not in text:
        raise UsageError(f"--fault expects SIGNAL=MASK, got {text!r}")
    name, mask = text.split("=", 1)
    try:
        sig = Signal.parse(name)
        return FaultSpec(sig, Word.parse(mask, sig.mask_width(width)).value)
    except ValueError as exc:
        raise UsageError(f"--fault {text!r}: {exc}")


def cmd_qr_trace(args) -> int:
    w = args.width
    try:
        words = [Word.parse(x, w) for x in args.words]
        faults = [_parse_fault(f, w) for f in args.fault]
        t = quarterround(*words, schedule=args.schedule, faults=faults)
    except ValueError as exc:
        raise UsageError(str(exc))
    honest = InputParities.of(*(x.value for x in words))
    out = t.to_dict()
    out["checks"] = {
        "classic": check_classic(t, honest).to_dict(),
        "gbpp": check_gbpp(t, InputParities.local(t)).to_dict(),
    }
    print(_dump(out))
    return 0


def cmd_verify(args) -> int:
    if args.mode == "random" and not args.samples:
        raise UsageError("--mode random needs --samples")
    try:
        results = run_all(args.width, args.mode, args.samples or 0, args.seed, args.schedule)
    except ValueError as exc:
        raise UsageError(str(exc))
    failed = sorted(k for k, v in results.items() if v["violations"])
    print(_dump({"width": args.width, "mode": args.mode, "samples": args.samples, "seed": args.seed,
                 "suites": results, "passed": not failed}))
    for name in failed:
        log.error("identity violated: %s (%d cases)", name, results[name]["violations"])
    return 1 if failed else 0


def cmd_campaign(args) -> int:
    inputs = args.inputs or ("random" if args.samples else "exhaustive")
    try:
        cfg = CampaignConfig(
            width=args.width, scheme=Scheme(args.scheme), signals=parse_signals(args.signals),
            errors=ErrorPolicy(args.errors), inputs=InputPolicy(inputs), samples=args.samples or 0,
            seed=args.seed, schedule=args.schedule, gbpp_parities=args.gbpp_parities,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    report = run_campaign(cfg, jobs=args.jobs)
    doc = report.to_dict()
    status = 0
    if args.expect_paper:
        try:
            verdict = classify_report(report)
        except ValueError as exc:
            raise UsageError(str(exc))
        doc["classification"] = verdict.to_dict()
        for msg in verdict.failures:
            log.error("coverage expectation unmet: %s", msg)
        status = 0 if verdict.passed else 1
    if args.format == "json":
        text = _dump(doc) + "\n"
    elif args.format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=report.CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(report.csv_rows())
        text = buf.getvalue()
    else:
        lines = [f"{'signal':<12} {'expected':<10} {'odd':>12} {'rate_odd':>9} {'even':>10} {'rate_even':>9}"]
        for r in report.rows:
            ro, re_ = r.detection_rate_odd, r.detection_rate_even
            lines.append(f"{r.signal.value:<12} {r.expected.value:<10} {r.tally.injected_odd:>12} "
                         f"{'-' if ro is None else f'{ro:.4f}':>9} {r.tally.injected_even:>10} "
                         f"{'-' if re_ is None else f'{re_:.4f}':>9}")
        if "classification" in doc:
            lines.append("expectations: " + ("met" if doc["classification"]["passed"] else "UNMET"))
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def cmd_gates(args) -> int:
    try:
        tally = count(args.scheme, args.width)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.json:
        print(_dump(tally.to_dict()))
    else:
        print(tally.total)
        for k, v in tally.breakdown.items():
            print(f"  {k}: {v}")
    return 0


# ---- parser ----

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chacha-ced", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("encrypt", help="ChaCha XOR encryption (also decrypts)")
    e.add_argument("--rounds", type=int, choices=(8, 12, 20), default=20)
    e.add_argument("--key", type=_hex_bytes, required=True, help="32-byte key in hex")
    e.add_argument("--nonce", type=_hex_bytes, required=True, help="8-byte (orig) or 12-byte (ietf) nonce in hex")
    e.add_argument("--counter", type=int, default=0)
    e.add_argument("--layout", choices=[x.value for x in NonceLayout], default="ietf")
    e.add_argument("--check", choices=[x.value for x in Scheme],
                   help="run a checker on every Quarterround; verdicts go to stderr as JSON lines")
    e.add_argument("--in", dest="input", help="input file (default stdin)")
    e.add_argument("--out", dest="output", help="output file (default stdout)")
    e.set_defaults(func=cmd_encrypt)

    q = sub.add_parser("qr-trace", help="print every wire of one Quarterround as JSON")
    q.add_argument("words", nargs=4, metavar="WORD", help="inputs a b c d in hex")
    q.add_argument("--width", type=int, default=32)
    q.add_argument("--schedule", type=_schedule, default=DEFAULT_SCHEDULE)
    q.add_argument("--fault", action="append", default=[], metavar="SIGNAL=MASK",
                   help="XOR MASK (hex) onto SIGNAL; repeatable")
    q.set_defaults(func=cmd_qr_trace)

    v = sub.add_parser("verify-identities", help="check the parity identities")
    v.add_argument("--width", type=int, default=4)
    v.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    v.add_argument("--samples", type=int)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--schedule", type=_schedule, default=DEFAULT_SCHEDULE)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("campaign", help="fault-injection coverage campaign")
    c.add_argument("--width", type=int, default=4)
    c.add_argument("--scheme", choices=[x.value for x in Scheme], required=True)
    c.add_argument("--signals", default="all", help="comma-separated signal names or 'all'")
    c.add_argument("--errors", choices=[x.value for x in ErrorPolicy], default="odd-exhaustive")
    c.add_argument("--inputs", choices=[x.value for x in InputPolicy],
                   help="default: random when --samples is given, else exhaustive")
    c.add_argument("--samples", type=int, help="random input tuples per signal")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--schedule", type=_schedule, default=DEFAULT_SCHEDULE)
    c.add_argument("--gbpp-parities", choices=("computed_local", "supplied_upstream"), default="computed_local")
    c.add_argument("--jobs", type=int, default=_default_jobs(),
                   help=f"worker processes (default ${JOBS_ENV} or 1)")
    c.add_argument("--format", choices=("json", "csv", "text"), default="json")
    c.add_argument("--out", help="write the report here instead of stdout")
    c.add_argument("--expect-paper", action="store_true",
                   help="exit 1 unless measured coverage matches the claimed coverage table")
    c.set_defaults(func=cmd_campaign)

    g = sub.add_parser("gates", help="gate count of a checker")
    g.add_argument("--width", type=int, default=32)
    g.add_argument("--scheme", choices=[x.value for x in Scheme], required=True)
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_gates)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    if getattr(args, "jobs", 1) is not None and getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    return 2


if __name__ == "__main__":
    sys.exit(main())
