"""Interactive sessions: submitting utterances, choosing candidates, defining
new phrasings, metrics, and on-disk persistence.

One session owns a world, a grammar, model parameters, and the interaction
log. All mutating calls are serialized by the service layer; this module
assumes single-threaded access per session.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from . import model as M
from . import programs as P
from .grammar import Grammar, GrammarRule, core_grammar
from .induction import Definition, InductionResult, induce_rules
from .interpreter import EvalError, execute
from .parser import ChartParser, Derivation, strip_root_scope, tokenize
from .world import Position, WorldState, world_from_dict, world_to_dict

MAX_SHOW = 10
MAX_DEFINE_DEPTH = 10
DEFAULT_WINDOW = 50


class SessionError(Exception):
    code = "session_error"


class NoCandidates(SessionError):
    code = "no_candidates"


class StaleCandidate(SessionError):
    code = "stale_candidate"


class NoDefineContext(SessionError):
    code = "no_define_context"


class DefinitionTooDeep(SessionError):
    code = "definition_too_deep"


class EmptyDefinition(SessionError):
    code = "empty_definition"


class RestoreError(SessionError):
    code = "restore_error"


@dataclass
class Candidate:
    index: int  # 1-based, as shown to the user
    derivation: Derivation
    features: M.FeatureVector
    next_state: WorldState

    @property
    def program_text(self) -> str:
        return P.pretty(self.derivation.program)

    @property
    def score(self) -> float:
        return self.derivation.score


@dataclass
class PendingChoice:
    """Candidates shown for one utterance, awaiting accept or reject."""

    user: str
    utterance: str
    tokens: List[str]
    base_state: WorldState
    candidates: List[Candidate]
    executed_roots: List[Tuple[Derivation, M.FeatureVector, Optional[WorldState]]]
    in_define: bool


@dataclass
class DefineContext:
    head: str
    scratch: WorldState
    body: List[Tuple[str, Derivation]] = field(default_factory=list)


@dataclass
class InteractionRecord:
    seq: int
    user: str
    utterance: str
    outcome: str  # accepted_core | accepted_induced | rejected | unparsable | defined
    rules_used: List[int]
    program_len: int
    utterance_len: int
    context: str  # top | define

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "user": self.user,
            "utterance": self.utterance,
            "outcome": self.outcome,
            "rules_used": list(self.rules_used),
            "program_len": self.program_len,
            "utterance_len": self.utterance_len,
            "context": self.context,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InteractionRecord":
        return cls(
            seq=int(data["seq"]),
            user=data["user"],
            utterance=data["utterance"],
            outcome=data["outcome"],
            rules_used=[int(i) for i in data["rules_used"]],
            program_len=int(data["program_len"]),
            utterance_len=int(data["utterance_len"]),
            context=data["context"],
        )


@dataclass
class SubmitResult:
    status: str  # "candidates" | "unparsable"
    utterance: str
    candidates: List[Candidate] = field(default_factory=list)
    base_state: Optional[WorldState] = None
    define_depth: int = 0


@dataclass
class DefineAcceptResult:
    head: str
    rules: List[GrammarRule]
    redundant: bool
    world: WorldState
    define_depth: int


def initial_world() -> WorldState:
    """Empty grid with the origin selected, so the first `add` lands somewhere."""
    return WorldState({}, [Position(0, 0, 0)])


class Session:
    def __init__(
        self,
        grammar: Optional[Grammar] = None,
        params: Optional[M.Params] = None,
        world: Optional[WorldState] = None,
        beam: int = 100,
        max_show: int = MAX_SHOW,
    ):
        self.grammar = grammar if grammar is not None else core_grammar()
        self.params = params if params is not None else M.Params()
        self.world = world if world is not None else initial_world()
        self.beam = beam
        self.max_show = max_show
        self.records: List[InteractionRecord] = []
        self.pending: Dict[str, PendingChoice] = {}
        self.define_stacks: Dict[str, List[DefineContext]] = {}
        self.history: Dict[str, List[Tuple[str, Derivation]]] = {}
        self._seq = 0

    # -- helpers ---------------------------------------------------------------

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _record(
        self,
        user: str,
        utterance: str,
        outcome: str,
        rules_used: Sequence[int] = (),
        program_len: int = 0,
        utterance_len: int = 0,
        context: str = "top",
    ) -> InteractionRecord:
        record = InteractionRecord(
            self._next_seq(), user, utterance, outcome, list(rules_used),
            program_len, utterance_len, context)
        self.records.append(record)
        return record

    def in_define(self, user: str) -> bool:
        return bool(self.define_stacks.get(user))

    def define_depth(self, user: str) -> int:
        return len(self.define_stacks.get(user, ()))

    def _stack(self, user: str) -> List[DefineContext]:
        return self.define_stacks.setdefault(user, [])

    def _parse_and_execute(
        self, user: str, utterance: str, state: WorldState
    ) -> Tuple[List[str], List[Candidate],
               List[Tuple[Derivation, M.FeatureVector, Optional[WorldState]]]]:
        parser = ChartParser(self.grammar, self.params, self.beam)
        result = parser.parse(utterance, user)
        executed = []
        for root in result.roots:
            features = M.featurize(root, result.tokens, user)
            try:
                next_state = execute(root.program, state)
            except EvalError:
                next_state = None
            executed.append((root, features, next_state))

        by_state: Dict[WorldState, Tuple[Derivation, M.FeatureVector, WorldState]] = {}
        for root, features, next_state in executed:
            if next_state is not None and next_state not in by_state:
                by_state[next_state] = (root, features, next_state)
        candidates = [
            Candidate(i + 1, root, features, next_state)
            for i, (root, features, next_state) in enumerate(
                list(by_state.values())[: self.max_show])
        ]
        return result.tokens, candidates, executed

    def _push_define(self, user: str, head: str, scratch: WorldState) -> None:
        stack = self._stack(user)
        if len(stack) + 1 > MAX_DEFINE_DEPTH:
            raise DefinitionTooDeep(
                f"definitions nested deeper than {MAX_DEFINE_DEPTH}")
        stack.append(DefineContext(head=head, scratch=scratch))

    # -- the interaction loop ----------------------------------------------------

    def submit(self, user: str, utterance: str) -> SubmitResult:
        """Parse an utterance against the real world and offer candidates.
        Submitting anew abandons any open definition flow for the user. An
        utterance with no workable parse opens a definition for it."""
        self.define_stacks.pop(user, None)
        self.pending.pop(user, None)
        tokens, candidates, executed = self._parse_and_execute(
            user, utterance, self.world)
        if not candidates:
            self._record(user, utterance, "unparsable",
                         utterance_len=len(tokens), context="top")
            self._push_define(user, head=utterance, scratch=self.world)
            return SubmitResult("unparsable", utterance,
                                define_depth=self.define_depth(user))
        self.pending[user] = PendingChoice(
            user, utterance, tokens, self.world, candidates, executed,
            in_define=False)
        return SubmitResult("candidates", utterance, candidates, self.world)

    def define_step(self, user: str, utterance: str) -> SubmitResult:
        """Parse a body utterance against the definition's scratch world. An
        unparsable step recursively opens a nested definition for it."""
        stack = self._stack(user)
        if not stack:
            raise NoDefineContext("no definition in progress")
        self.pending.pop(user, None)
        context = stack[-1]
        tokens, candidates, executed = self._parse_and_execute(
            user, utterance, context.scratch)
        if not candidates:
            self._record(user, utterance, "unparsable",
                         utterance_len=len(tokens), context="define")
            self._push_define(user, head=utterance, scratch=context.scratch)
            return SubmitResult("unparsable", utterance,
                                define_depth=self.define_depth(user))
        self.pending[user] = PendingChoice(
            user, utterance, tokens, context.scratch, candidates, executed,
            in_define=True)
        return SubmitResult("candidates", utterance, candidates, context.scratch,
                            define_depth=self.define_depth(user))

    def accept(self, user: str, index: int) -> Candidate:
        """Commit candidate `index` (1-based). In a definition flow this
        appends to the body; at top level it advances the world."""
        pending = self.pending.get(user)
        if pending is None:
            raise NoCandidates("no candidates outstanding")
        if not 1 <= index <= len(pending.candidates):
            raise StaleCandidate(
                f"candidate {index} is not on the current list")
        chosen = pending.candidates[index - 1]
        self._learn(pending, chosen)
        self._count_usage(user, chosen.derivation)
        rule_ids = chosen.derivation.rule_ids()
        outcome = ("accepted_core" if chosen.derivation.is_core_only()
                   else "accepted_induced")
        stripped = strip_root_scope(chosen.derivation)

        if pending.in_define:
            context = self._stack(user)[-1]
            context.body.append((pending.utterance, chosen.derivation))
            context.scratch = chosen.next_state
            self._record(user, pending.utterance, outcome, rule_ids,
                         P.program_length(stripped.program),
                         len(pending.tokens), context="define")
        else:
            self.world = chosen.next_state
            self._cite(user, chosen.derivation)
            self.history.setdefault(user, []).append(
                (pending.utterance, chosen.derivation))
            self._record(user, pending.utterance, outcome, rule_ids,
                         P.program_length(stripped.program),
                         len(pending.tokens), context="top")
        del self.pending[user]
        return chosen

    def reject(self, user: str) -> SubmitResult:
        """Dismiss all current candidates and open a definition for the
        rejected utterance."""
        pending = self.pending.pop(user, None)
        if pending is None:
            raise NoCandidates("no candidates outstanding")
        self._record(user, pending.utterance, "rejected",
                     utterance_len=len(pending.tokens),
                     context="define" if pending.in_define else "top")
        self._push_define(user, head=pending.utterance, scratch=pending.base_state)
        return SubmitResult("unparsable", pending.utterance,
                            define_depth=self.define_depth(user))

    def define_start(self, user: str, head: str) -> SubmitResult:
        """Explicitly open a definition for `head` (the proactive path; the
        reactive paths are unparsable submits and rejections)."""
        self.pending.pop(user, None)
        scratch = self._stack(user)[-1].scratch if self.in_define(user) else self.world
        self._push_define(user, head=head, scratch=scratch)
        return SubmitResult("unparsable", head,
                            define_depth=self.define_depth(user))

    def define_cancel(self, user: str) -> int:
        stack = self._stack(user)
        if not stack:
            raise NoDefineContext("no definition in progress")
        stack.pop()
        self.pending.pop(user, None)
        return len(stack)

    def define_accept(
        self,
        user: str,
        head: Optional[str] = None,
        last: Optional[int] = None,
    ) -> DefineAcceptResult:
        """Close the open definition and induce rules from it. Without an
        open definition, `head` plus `last` names the user's most recent
        `last` accepted commands as the body (define by demonstration)."""
        stack = self._stack(user)
        if stack:
            context = stack[-1]
            if not context.body:
                raise EmptyDefinition("definition body is empty")
            stack.pop()
            definition = Definition(
                author=user,
                head=context.head,
                body_utterances=[utt for utt, _ in context.body],
                body_derivations=[d for _, d in context.body],
            )
            result = self._induce(definition)
            if stack:
                self._commit_to_parent(user, stack[-1], context, result)
            else:
                self.world = context.scratch
            self.pending.pop(user, None)
            return DefineAcceptResult(context.head, result.rules,
                                      result.redundant, self.world,
                                      len(stack))

        if head is None or not last or last < 1:
            raise NoDefineContext(
                "no definition in progress; pass head and last to define from history")
        past = self.history.get(user, [])
        if len(past) < last:
            raise EmptyDefinition(f"only {len(past)} accepted commands on record")
        tail = past[-last:]
        definition = Definition(
            author=user,
            head=head,
            body_utterances=[utt for utt, _ in tail],
            body_derivations=[d for _, d in tail],
        )
        result = self._induce(definition)
        return DefineAcceptResult(head, result.rules, result.redundant,
                                  self.world, 0)

    # -- learning and bookkeeping -------------------------------------------------

    def _learn(self, pending: PendingChoice, chosen: Candidate) -> None:
        features = [fv for _, fv, _ in pending.executed_roots]
        consistent = {
            i for i, (_, _, state) in enumerate(pending.executed_roots)
            if state == chosen.next_state
        }
        self.params = M.update(self.params, features, consistent)

    def _count_usage(self, user: str, derivation: Derivation) -> None:
        for rule_id in derivation.rule_ids():
            rule = self.grammar.by_id[rule_id]
            rule.use_count += 1
            if not rule.is_core and rule.author != user:
                rule.used_by_other = True

    def _cite(self, user: str, derivation: Derivation) -> None:
        for rule_id in sorted(set(derivation.rule_ids())):
            rule = self.grammar.by_id[rule_id]
            if not rule.is_core and rule.author != user:
                rule.citations += 1

    def _induce(self, definition: Definition) -> InductionResult:
        result = induce_rules(definition, self.grammar, self.params, self.beam)
        stripped = strip_root_scope(definition.body_derivations[0])
        body_program = result.body_program
        self._record(
            definition.author, definition.head, "defined",
            [r.id for r in result.rules],
            P.program_length(body_program) if body_program is not None else 0,
            len(result.head_tokens) or len(tokenize(definition.head)),
            context="define")
        return result

    def _commit_to_parent(
        self,
        user: str,
        parent: DefineContext,
        closed: DefineContext,
        induction: InductionResult,
    ) -> None:
        """After a nested definition closes, its head becomes a committed body
        utterance of the parent."""
        parser = ChartParser(self.grammar, self.params, self.beam)
        parsed = parser.parse(closed.head, user)
        committed = None
        for root in parsed.roots:
            if strip_root_scope(root).program == induction.body_program:
                committed = root
                break
        if committed is None and parsed.roots:
            committed = parsed.roots[0]
        if committed is None:
            raise SessionError(
                f"definition head {closed.head!r} still does not parse")
        parent.body.append((closed.head, committed))
        parent.scratch = closed.scratch

    # -- metrics -------------------------------------------------------------------

    def metrics_report(self, window: int = DEFAULT_WINDOW) -> dict:
        records = self.records
        total = len(records)

        def fractions(chunk: List[InteractionRecord]) -> dict:
            n = len(chunk)
            core = sum(1 for r in chunk if r.outcome == "accepted_core")
            induced = sum(1 for r in chunk if r.outcome == "accepted_induced")
            unparsable = sum(1 for r in chunk if r.outcome == "unparsable")
            accepted = [r for r in chunk if r.outcome.startswith("accepted")]
            ratio = (sum(r.program_len / r.utterance_len for r in accepted
                         if r.utterance_len) / len(accepted)) if accepted else 0.0
            return {
                "count": n,
                "frac_core": core / n if n else 0.0,
                "frac_induced": induced / n if n else 0.0,
                "frac_unparsable": unparsable / n if n else 0.0,
                "program_utterance_ratio": ratio,
            }

        windows = []
        for start in range(0, total, window):
            chunk = records[start:start + window]
            row = fractions(chunk)
            row["window_start"] = start
            windows.append(row)

        accepted = [r for r in records if r.outcome.startswith("accepted")]
        induced_accepted = [r for r in accepted if r.outcome == "accepted_induced"]
        per_user: Dict[str, dict] = {}
        for r in accepted:
            entry = per_user.setdefault(r.user, {"accepted": 0, "induced": 0})
            entry["accepted"] += 1
            if r.outcome == "accepted_induced":
                entry["induced"] += 1
        for entry in per_user.values():
            entry["induced_fraction"] = (
                entry["induced"] / entry["accepted"] if entry["accepted"] else 0.0)

        leaderboard: Dict[str, int] = {}
        rule_citations = []
        for rule in self.grammar.induced_rules():
            if rule.citations:
                leaderboard[rule.author] = leaderboard.get(rule.author, 0) + rule.citations
                rule_citations.append({
                    "rule_id": rule.id,
                    "author": rule.author,
                    "citations": rule.citations,
                })
        ranked = sorted(leaderboard.items(), key=lambda kv: (-kv[1], kv[0]))

        report = fractions(list(records))
        report.update({
            "windows": windows,
            "window_size": window,
            "accepted_total": len(accepted),
            "accepted_induced_fraction": (
                len(induced_accepted) / len(accepted) if accepted else 0.0),
            "per_user": per_user,
            "rule_counts": {
                "core": self.grammar.core_count(),
                "induced": len(self.grammar.induced_rules()),
            },
            "citations": [{"author": a, "citations": c} for a, c in ranked],
            "rule_citations": sorted(
                rule_citations, key=lambda r: (-r["citations"], r["rule_id"])),
        })
        return report

    # -- persistence -----------------------------------------------------------------

    GRAMMAR_FILE = "grammar.jsonl"
    PARAMS_FILE = "params.json"
    WORLD_FILE = "world.json"
    INTERACTIONS_FILE = "interactions.jsonl"
    META_FILE = "meta.json"

    def persist(self, directory: str) -> None:
        os.makedirs(directory, exist_ok=True)

        def dump(data) -> str:
            return json.dumps(data, sort_keys=True, separators=(",", ":"))

        with open(os.path.join(directory, self.GRAMMAR_FILE), "w") as fh:
            for rule in self.grammar.induced_rules():
                fh.write(dump(Grammar.rule_record(rule)) + "\n")
        with open(os.path.join(directory, self.PARAMS_FILE), "w") as fh:
            fh.write(dump(self.params.to_dict()) + "\n")
        with open(os.path.join(directory, self.WORLD_FILE), "w") as fh:
            fh.write(dump(world_to_dict(self.world)) + "\n")
        with open(os.path.join(directory, self.INTERACTIONS_FILE), "w") as fh:
            for record in self.records:
                fh.write(dump(record.to_dict()) + "\n")
        with open(os.path.join(directory, self.META_FILE), "w") as fh:
            fh.write(dump({"beam": self.beam, "max_show": self.max_show}) + "\n")

    @classmethod
    def restore(cls, directory: str) -> "Session":
        meta_path = os.path.join(directory, cls.META_FILE)
        meta = {}
        if os.path.exists(meta_path):
            with open(meta_path) as fh:
                meta = json.load(fh)

        session = cls(beam=meta.get("beam", 100),
                      max_show=meta.get("max_show", MAX_SHOW))

        grammar_path = os.path.join(directory, cls.GRAMMAR_FILE)
        if os.path.exists(grammar_path):
            with open(grammar_path) as fh:
                for line_no, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        record = json.loads(line)
                        session.grammar.insert_from_record(record)
                    except Exception as exc:
                        raise RestoreError(
                            f"{cls.GRAMMAR_FILE} line {line_no}: {exc}") from exc

        params_path = os.path.join(directory, cls.PARAMS_FILE)
        if os.path.exists(params_path):
            with open(params_path) as fh:
                session.params = M.Params.from_dict(json.load(fh))

        world_path = os.path.join(directory, cls.WORLD_FILE)
        if os.path.exists(world_path):
            with open(world_path) as fh:
                session.world = world_from_dict(json.load(fh))

        interactions_path = os.path.join(directory, cls.INTERACTIONS_FILE)
        if os.path.exists(interactions_path):
            with open(interactions_path) as fh:
                for line_no, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        record = InteractionRecord.from_dict(json.loads(line))
                    except Exception as exc:
                        raise RestoreError(
                            f"{cls.INTERACTIONS_FILE} line {line_no}: {exc}") from exc
                    session.records.append(record)
            session._seq = max((r.seq for r in session.records), default=0)
            session._replay_counters()
        return session

    def _replay_counters(self) -> None:
        """Rebuild rule usage counters and citations from the interaction log."""
        for record in self.records:
            if not record.outcome.startswith("accepted"):
                continue
            for rule_id in record.rules_used:
                rule = self.grammar.by_id.get(rule_id)
                if rule is None:
                    continue
                rule.use_count += 1
                if not rule.is_core and rule.author != record.user:
                    rule.used_by_other = True
            if record.context == "top":
                for rule_id in sorted(set(record.rules_used)):
                    rule = self.grammar.by_id.get(rule_id)
                    if rule is not None and not rule.is_core and rule.author != record.user:
                        rule.citations += 1
