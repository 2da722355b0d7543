"""Terminal front end: an interactive REPL, deterministic script replay with
CSV metrics export, and a `serve` mode hosting the HTTP service.

Replay scripts are tab-separated lines `user<TAB>kind<TAB>payload` where kind
is one of utter, pick, reject, defstep, defaccept, defhead. Blank lines and
lines starting with `#` are skipped.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence, TextIO

from . import model as M
from .session import Session, SessionError, SubmitResult
from .world import Position, WorldState, world_from_dict

COLOR_CHARS = {
    "red": "r", "orange": "o", "yellow": "y", "green": "g", "blue": "b",
    "black": "k", "white": "w", "brown": "n", "gray": "a", "pink": "p",
}

CSV_HEADER = "window_start,frac_core,frac_induced,frac_unparsable,ratio"


def render_world(state: WorldState) -> str:
    """Plan view per height layer; selected cells are bracketed."""
    cells = set(state.voxels) | set(state.selection)
    if not cells:
        return "(empty world)"
    rows = sorted({p.row for p in cells})
    cols = sorted({p.col for p in cells})
    heights = sorted({p.height for p in cells})
    lines = []
    for h in range(heights[0], heights[-1] + 1):
        if not any(p.height == h for p in cells):
            continue
        lines.append(f"height {h}:")
        for r in range(rows[0], rows[-1] + 1):
            out = []
            for c in range(cols[0], cols[-1] + 1):
                p = Position(r, c, h)
                ch = COLOR_CHARS[state.voxels[p].value] if p in state.voxels else "."
                out.append(f"[{ch}]" if p in state.selection else f" {ch} ")
            lines.append("".join(out).rstrip())
    return "\n".join(lines)


def diff_summary(diff: dict) -> str:
    return (f"+{len(diff['added'])} -{len(diff['removed'])}"
            f" ~{len(diff['changed'])} sel {len(diff['selection'])}")


def show_submit(result: SubmitResult, out: TextIO) -> None:
    from .world import world_diff

    if result.status == "unparsable":
        out.write(
            f"no parse for {result.utterance!r}; defining it"
            f" (depth {result.define_depth}). enter body commands,"
            " then :done or :cancel\n")
        return
    for cand in result.candidates:
        diff = world_diff(result.base_state, cand.next_state)
        out.write(f"  {cand.index}. [{cand.score:+.3f}] {cand.program_text}"
                  f"   ({diff_summary(diff)})\n")
    out.write("pick with :accept N, or :reject to define instead\n")


def dispatch(session: Session, user: str, kind: str, payload: str):
    """One script command against the session, with REPL-equivalent routing:
    a plain utterance goes to the open definition when there is one."""
    if kind == "utter":
        if session.in_define(user):
            return session.define_step(user, payload)
        return session.submit(user, payload)
    if kind == "pick":
        return session.accept(user, int(payload))
    if kind == "reject":
        return session.reject(user)
    if kind == "defstep":
        return session.define_step(user, payload)
    if kind == "defhead":
        return session.define_start(user, payload)
    if kind == "defaccept":
        if payload:
            parts = payload.split("\t")
            if len(parts) == 2 and parts[0].isdigit():
                return session.define_accept(user, head=parts[1], last=int(parts[0]))
        return session.define_accept(user)
    raise ValueError(f"unknown command kind {kind!r}")


def run_script(session: Session, path: str, out: TextIO) -> None:
    with open(path) as fh:
        lines = fh.readlines()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t", 2)
        if len(parts) < 2:
            raise SystemExit(f"{path}:{line_no}: expected user<TAB>kind[<TAB>payload]")
        user, kind = parts[0], parts[1]
        payload = parts[2] if len(parts) > 2 else ""
        try:
            dispatch(session, user, kind, payload)
        except (SessionError, ValueError) as exc:
            raise SystemExit(f"{path}:{line_no}: {exc}")


def metrics_csv(session: Session, window: int) -> str:
    report = session.metrics_report(window=window)
    lines = [CSV_HEADER]
    for row in report["windows"]:
        lines.append(
            f"{row['window_start']},{row['frac_core']:.6f},"
            f"{row['frac_induced']:.6f},{row['frac_unparsable']:.6f},"
            f"{row['program_utterance_ratio']:.6f}")
    return "\n".join(lines) + "\n"


def build_session(args: argparse.Namespace) -> Session:
    if getattr(args, "state", None):
        session = Session.restore(args.state)
        if args.seed_k:
            session.beam = args.seed_k
    else:
        session = Session(beam=args.seed_k or 100)
    if getattr(args, "grammar_log", None):
        with open(args.grammar_log) as fh:
            for line in fh:
                if line.strip():
                    session.grammar.insert_from_record(json.loads(line))
    if getattr(args, "params", None):
        with open(args.params) as fh:
            session.params = M.Params.from_dict(json.load(fh))
    if getattr(args, "world", None):
        with open(args.world) as fh:
            session.world = world_from_dict(json.load(fh))
    return session


def repl(session: Session, user: str, stdin: TextIO, stdout: TextIO) -> Session:
    stdout.write("voxel command loop. :help for commands.\n")
    while True:
        depth = session.define_depth(user)
        prompt = f"{user}[def{depth}]> " if depth else f"{user}> "
        stdout.write(prompt)
        stdout.flush()
        raw = stdin.readline()
        if not raw:
            break
        line = raw.strip()
        if not line:
            continue
        try:
            if line.startswith(":"):
                parts = line.split(None, 1)
                cmd, rest = parts[0], parts[1] if len(parts) > 1 else ""
                if cmd in (":quit", ":q", ":exit"):
                    break
                elif cmd == ":help":
                    stdout.write(
                        ":accept N | :reject | :def HEAD | :done | :cancel |"
                        " :demo K HEAD | :metrics | :grammar | :world |"
                        " :save DIR | :load DIR | :user NAME | :quit\n")
                elif cmd == ":accept":
                    chosen = session.accept(user, int(rest))
                    stdout.write(f"applied: {chosen.program_text}\n")
                    shown = (session.define_stacks[user][-1].scratch
                             if session.in_define(user) else session.world)
                    stdout.write(render_world(shown) + "\n")
                elif cmd == ":reject":
                    show_submit(session.reject(user), stdout)
                elif cmd == ":def":
                    if not rest:
                        stdout.write("usage: :def HEAD WORDS\n")
                    else:
                        show_submit(session.define_start(user, rest), stdout)
                elif cmd == ":done":
                    result = session.define_accept(user)
                    if result.redundant:
                        stdout.write(f"{result.head!r} already parses to the"
                                     " same program; nothing new learned\n")
                    for rule in result.rules:
                        stdout.write(f"learned rule {rule.id}: {rule.lhs.value}"
                                     f" -> {rule.rhs_text()}\n")
                elif cmd == ":cancel":
                    depth = session.define_cancel(user)
                    stdout.write(f"definition dropped (depth {depth})\n")
                elif cmd == ":demo":
                    k, head = rest.split(None, 1)
                    result = session.define_accept(user, head=head, last=int(k))
                    for rule in result.rules:
                        stdout.write(f"learned rule {rule.id}: {rule.lhs.value}"
                                     f" -> {rule.rhs_text()}\n")
                elif cmd == ":metrics":
                    stdout.write(json.dumps(session.metrics_report(),
                                            indent=2, sort_keys=True) + "\n")
                elif cmd == ":grammar":
                    for rule in session.grammar.induced_rules():
                        stdout.write(f"{rule.id}: {rule.lhs.value} ->"
                                     f" {rule.rhs_text()}  (by {rule.author},"
                                     f" used {rule.use_count})\n")
                elif cmd == ":world":
                    stdout.write(render_world(session.world) + "\n")
                elif cmd == ":save":
                    session.persist(rest)
                    stdout.write(f"saved to {rest}\n")
                elif cmd == ":load":
                    session = Session.restore(rest)
                    stdout.write(f"loaded from {rest}\n")
                elif cmd == ":user":
                    user = rest or user
                    stdout.write(f"now acting as {user}\n")
                else:
                    stdout.write(f"unknown command {cmd}; :help lists them\n")
            else:
                if session.in_define(user):
                    show_submit(session.define_step(user, line), stdout)
                else:
                    show_submit(session.submit(user, line), stdout)
        except (SessionError, ValueError) as exc:
            stdout.write(f"error: {exc}\n")
    return session


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grammar-log", help="induced-rule log (jsonl) to preload")
    common.add_argument("--params", help="model parameter file (json) to preload")
    common.add_argument("--world", help="world state file (json) to preload")
    common.add_argument("--state", help="session directory to restore")
    common.add_argument("--seed-k", type=int, default=0, metavar="K",
                        help="parser beam width (default 100)")

    parser = argparse.ArgumentParser(
        prog="voxlang",
        description="Build voxel structures in a language that grows with use.")
    sub = parser.add_subparsers(dest="mode")

    repl_p = sub.add_parser("repl", parents=[common], help="interactive loop")
    repl_p.add_argument("--user", default="me")

    replay_p = sub.add_parser("replay", parents=[common],
                              help="run a scripted session")
    replay_p.add_argument("script", nargs="?", help="script file")
    replay_p.add_argument("--replay", dest="replay_flag", metavar="FILE",
                          help="script file (flag form)")
    replay_p.add_argument("--metrics-out", help="write windowed metrics CSV here")
    replay_p.add_argument("--window", type=int, default=50)
    replay_p.add_argument("--state-out", help="persist the final session here")
    replay_p.add_argument("--quiet", action="store_true")

    serve_p = sub.add_parser("serve", parents=[common], help="host the HTTP API")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        argv = ["repl"]
    elif argv[0] not in ("repl", "replay", "serve", "-h", "--help"):
        has_replay = any(a == "--replay" or a.startswith("--replay=") for a in argv)
        argv.insert(0, "replay" if has_replay else "repl")

    args = make_parser().parse_args(argv)
    session = build_session(args)

    if args.mode == "repl":
        repl(session, args.user, sys.stdin, sys.stdout)
        return 0

    if args.mode == "replay":
        script = args.script or args.replay_flag
        if not script:
            raise SystemExit("replay needs a script file")
        run_script(session, script, sys.stdout)
        csv_text = metrics_csv(session, args.window)
        if args.metrics_out:
            with open(args.metrics_out, "w") as fh:
                fh.write(csv_text)
        if args.state_out:
            session.persist(args.state_out)
        if not args.quiet:
            report = session.metrics_report(window=args.window)
            sys.stdout.write(csv_text)
            sys.stdout.write(
                f"interactions {report['count']}"
                f" induced_rules {report['rule_counts']['induced']}"
                f" accepted_induced_fraction"
                f" {report['accepted_induced_fraction']:.6f}\n")
        return 0

    if args.mode == "serve":
        import uvicorn

        from .service import SessionRegistry, create_app

        registry = SessionRegistry()
        registry.create("default", session)
        uvicorn.run(create_app(registry), host=args.host, port=args.port,
                    log_level="warning")
        return 0

    raise SystemExit(f"unknown mode {args.mode!r}")


if __name__ == "__main__":
    raise SystemExit(main())
