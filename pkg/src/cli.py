"""
Interface en ligne de commande: closure, normalizer, tower, schur, detect-normal, verify
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from loguru import logger

from src.closure import AUTO, GENERIC, ClosureResult, free_normal_closure, relative_schur_multiplier
from src.config import Config, use_config
from src.errors import InputError, InvariantViolationError, ToolkitError
from src.groups import (
    abelian_display_name,
    abelian_invariants,
    abelianization,
    center,
    derived_subgroup,
    is_nilpotent,
)
from src.normalizer import detect_normal_structure, injective_normalizer, normalizer_diagnostics
from src.report import CheckRecord, Report, emit_report
from src.spec_format import GroupSpecDoc, load_spec
from src.towers import (
    check_tower,
    closures_tower,
    normalizers_tower,
    tower_abelianization_probe,
)
from src.verify import run_invariant_suite

_STRATEGIES = {"auto": AUTO, "tc": GENERIC, "surjective": "surjective", "abelian": "abelian",
               "normal-inclusion": "normal-inclusion"}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise InputError(f"arguments invalides: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="document GROUP/HOM")
    common.add_argument("--hom", help="homomorphisme à traiter")
    common.add_argument("--max-cosets", type=int, dest="max_cosets")
    common.add_argument("--json", nargs="?", const="", dest="json_path",
                        help="écrit aussi le rapport JSON (défaut: outputs/)")

    parser = _Parser(prog="nct", description="Clôtures normales libres et normalisateurs injectifs")
    parser.add_argument("--config", help="configuration JSON")
    parser.add_argument("--format", choices=["text", "json"], default="text")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    closure = sub.add_parser("closure", parents=[common])
    closure.add_argument("--strategy", choices=sorted(_STRATEGIES), default="auto")
    sub.add_parser("normalizer", parents=[common])
    tower_kind = argparse.ArgumentParser(add_help=False)
    tower_kind.add_argument("kind", choices=["closure", "normalizer"])
    tower = sub.add_parser("tower", parents=[tower_kind, common])
    tower.add_argument("--max-steps", type=int, dest="max_steps")
    schur = sub.add_parser("schur", parents=[common])
    schur.add_argument("--strategy", choices=sorted(_STRATEGIES), default="auto")
    sub.add_parser("detect-normal", parents=[common])
    verify = sub.add_parser("verify", parents=[common])
    verify.add_argument("--strategy", choices=sorted(_STRATEGIES), default="auto")
    return parser


def closure_results(cr: ClosureResult) -> dict[str, Any]:
    kernel_group, _ = cr.kernel.as_group()
    kernel = abelian_invariants(kernel_group)
    ab = abelian_invariants(abelianization(cr.cl).group)
    D, _ = derived_subgroup(cr.cl).as_group()
    return {
        "cl_order": cr.cl.order,
        "strategy": cr.strategy,
        "kernel": kernel,
        "kernel_order": cr.kernel.order,
        "kernel_name": abelian_display_name(kernel),
        "center_order": center(cr.cl).order,
        "abelianization": ab,
        "abelianization_name": abelian_display_name(ab),
        "derived_order": D.order,
        "derived_perfect": derived_subgroup(D).is_whole(),
        "derived_center_order": center(D).order,
        "image_order": cr.phi_hat.n.image().order,
        "nilpotent": is_nilpotent(cr.cl),
    }


class ToolkitSession:
    """Session CLI: configuration, document chargé, exécution des sous-commandes"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = Config(args.config)
        use_config(self.config)
        logger.remove()
        logger.add(sys.stderr, level=self.config.log_level)
        self.doc: Optional[GroupSpecDoc] = None

    def load(self) -> GroupSpecDoc:
        path = Path(self.args.file)
        # un nom nu désigne aussi un document de fixtures/
        if not path.exists() and (self.config.fixtures_dir / path).exists():
            path = self.config.fixtures_dir / path
        self.doc = load_spec(path, self.args.max_cosets)
        return self.doc

    def run(self, report: Report):
        handler = getattr(self, "_cmd_" + self.args.command.replace("-", "_"))
        handler(report)

    def _strategy(self) -> str:
        return _STRATEGIES[getattr(self.args, "strategy", "auto")]

    def _cmd_closure(self, report: Report):
        phi = self.load().hom(self.args.hom)
        cr = free_normal_closure(phi, self._strategy(), self.args.max_cosets)
        report.results.update(closure_results(cr))

    def _cmd_schur(self, report: Report):
        phi = self.load().hom(self.args.hom)
        schur = relative_schur_multiplier(phi, self._strategy(), self.args.max_cosets)
        report.results.update({
            "kernel": schur.abelian_invariants,
            "kernel_order": schur.kernel_group.order,
            "kernel_name": abelian_display_name(schur.abelian_invariants),
        })

    def _cmd_normalizer(self, report: Report):
        phi = self.load().hom(self.args.hom)
        nr = injective_normalizer(phi)
        report.results.update({
            "order": nr.N.order,
            "aut_order": nr.aut_gamma.group.order,
            "projection_image_order": nr.p_phi.image().order,
            "kernel_tilde_order": nr.phi_tilde.n.kernel().order,
        })
        report.checks.append(CheckRecord.from_verdict("normalizer-diagnostics", normalizer_diagnostics(nr)))

    def _cmd_detect_normal(self, report: Report):
        phi = self.load().hom(self.args.hom)
        section = detect_normal_structure(phi)
        report.results["found"] = section.found

    def _cmd_tower(self, report: Report):
        phi = self.load().hom(self.args.hom)
        if self.args.kind == "closure":
            trace = closures_tower(phi, self.args.max_steps, self.args.max_cosets)
            report.checks.append(CheckRecord.from_verdict("abelianization-probe", tower_abelianization_probe(trace)))
        else:
            trace = normalizers_tower(phi, self.args.max_steps)
        report.checks.append(CheckRecord.from_verdict("tower", check_tower(trace)))
        report.results.update({
            "kind": trace.kind,
            "orders": trace.orders,
            "stabilized_at": trace.stabilized_at,
            "steps_run": trace.steps_run,
            "partial": trace.error,
        })
        if trace.bound_check is not None:
            report.results["bound"] = {
                "bound_value": trace.bound_check.bound_value,
                "max_stage_order": trace.bound_check.max_stage_order,
                "satisfied": trace.bound_check.satisfied,
            }

    def _cmd_verify(self, report: Report):
        doc = self.load()
        names = [self.args.hom] if self.args.hom else list(doc.homs)
        for name in names:
            for record in run_invariant_suite(doc.hom(name), self._strategy(), self.args.max_cosets):
                report.checks.append(record.model_copy(update={"name": f"{name}:{record.name}"}))
        report.results["homomorphisms"] = names

    def write_json(self, report: Report):
        if self.args.json_path is None:
            return
        path = Path(self.args.json_path) if self.args.json_path else self.config.report_path(self.args.command)
        path.write_bytes(emit_report(report, "json"))


def run_command(argv: Sequence[str]) -> tuple[Report, int]:
    """Exécute une commande; renvoie le rapport et le code de sortie (0, 1, 2 ou 3)"""
    report = Report(command=list(argv))
    session = None
    try:
        args = build_parser().parse_args(list(argv))
        session = ToolkitSession(args)
        session.run(report)
    except ToolkitError as e:
        logger.error(str(e))
        report.record_error(e)
    except Exception as e:
        logger.exception(f"erreur interne: {e}")
        report.record_error(InvariantViolationError(f"erreur interne: {e}", {"type": type(e).__name__}))
    code = report.settle()
    if session is not None:
        try:
            session.write_json(report)
        except OSError as e:
            logger.error(f"écriture du rapport impossible: {e}")
    use_config(None)
    return report, code


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--format", choices=["text", "json"], default="text")
    fmt = pre.parse_known_args(argv)[0].format
    report, code = run_command(argv)
    sys.stdout.buffer.write(emit_report(report, fmt))
    sys.stdout.flush()
    return code
