import io
import json

import pytest

from voxlang.cli import (
    CSV_HEADER,
    build_session,
    diff_summary,
    dispatch,
    main,
    make_parser,
    metrics_csv,
    render_world,
    repl,
    run_script,
)
from voxlang.session import Session
from voxlang.world import Color, Position, WorldState


SCRIPT = """\
# build upward, teach a word for one storey, reuse the word
amy\tutter\tadd red top
amy\tpick\t1
amy\tutter\tred tower
amy\tutter\tselect top
amy\tpick\t1
amy\tutter\tadd red top
amy\tpick\t1
amy\tdefaccept\t
amy\tutter\tred tower
amy\tpick\t1
"""


def write_script(tmp_path, text=SCRIPT, name="session.script"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# -- rendering ---------------------------------------------------------------------


def test_render_world_empty():
    assert render_world(WorldState({}, [])) == "(empty world)"


def test_render_world_layers_and_selection():
    state = WorldState(
        {Position(0, 0, 0): Color.RED, Position(1, 1, 0): Color.BLUE,
         Position(0, 0, 1): Color.GREEN},
        [Position(0, 0, 0)],
    )
    text = render_world(state)
    assert "height 0:" in text and "height 1:" in text
    lines = text.splitlines()
    layer0 = lines[lines.index("height 0:") + 1]
    assert layer0.startswith("[r]")  # selected red voxel is bracketed
    layer1 = lines[lines.index("height 1:") + 1]
    assert layer1.startswith(" g")
    assert " b" in lines[lines.index("height 0:") + 2]


def test_render_world_shows_empty_selected_cell():
    text = render_world(WorldState({}, [Position(0, 0, 0)]))
    assert "[.]" in text


def test_diff_summary():
    diff = {"added": [1, 2], "removed": [], "changed": [3], "selection": [4]}
    assert diff_summary(diff) == "+2 -0 ~1 sel 1"


# -- script dispatch ----------------------------------------------------------------


def test_dispatch_routes_utterances_by_context():
    session = Session()
    dispatch(session, "amy", "utter", "red tower")   # unparsable, opens define
    assert session.in_define("amy")
    dispatch(session, "amy", "utter", "add red top")  # routed into the body
    dispatch(session, "amy", "pick", "1")
    result = dispatch(session, "amy", "defaccept", "")
    assert result.rules
    assert not session.in_define("amy")


def test_dispatch_demonstration_payload():
    session = Session()
    dispatch(session, "amy", "utter", "add red top")
    dispatch(session, "amy", "pick", "1")
    result = dispatch(session, "amy", "defaccept", "1\tstack here")
    assert result.head == "stack here"
    assert result.rules


def test_dispatch_reject_and_defhead():
    session = Session()
    dispatch(session, "amy", "utter", "add red")
    dispatch(session, "amy", "reject", "")
    assert session.define_depth("amy") == 1
    dispatch(session, "amy", "defhead", "inner move")
    assert session.define_depth("amy") == 2


def test_dispatch_unknown_kind():
    with pytest.raises(ValueError):
        dispatch(Session(), "amy", "bogus", "")


def test_run_script_full_flow(tmp_path):
    session = Session()
    run_script(session, write_script(tmp_path), io.StringIO())
    # one storey from the define scratch, one more from the reuse
    for height in (1, 2, 3):
        assert Position(0, 0, height) in session.world.voxels
    assert session.records[-1].outcome == "accepted_induced"


def test_run_script_reports_bad_lines(tmp_path):
    path = write_script(tmp_path, "amy\tpick\t1\n", name="bad.script")
    with pytest.raises(SystemExit) as err:
        run_script(Session(), path, io.StringIO())
    assert f"{path}:1:" in str(err.value)


def test_run_script_reports_malformed_lines(tmp_path):
    path = write_script(tmp_path, "just one field\n", name="short.script")
    with pytest.raises(SystemExit) as err:
        run_script(Session(), path, io.StringIO())
    assert f"{path}:1:" in str(err.value)
    assert "user<TAB>kind" in str(err.value)


def test_run_script_line_numbers_skip_comments(tmp_path):
    path = write_script(tmp_path, "# comment\n\namy\tbogus\tx\n", name="c.script")
    with pytest.raises(SystemExit) as err:
        run_script(Session(), path, io.StringIO())
    assert f"{path}:3:" in str(err.value)


# -- metrics CSV --------------------------------------------------------------------


def test_metrics_csv_format(tmp_path):
    session = Session()
    run_script(session, write_script(tmp_path), io.StringIO())
    text = metrics_csv(session, window=5)
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 2  # 6 records in windows of 5
    first = lines[1].split(",")
    assert first[0] == "0"
    for cell in first[1:]:
        assert len(cell.split(".")[1]) == 6  # fixed six decimals


# -- argument handling ---------------------------------------------------------------


def test_parser_modes():
    parser = make_parser()
    assert parser.parse_args(["repl"]).mode == "repl"
    args = parser.parse_args(["replay", "x.script", "--window", "10"])
    assert args.mode == "replay" and args.script == "x.script"
    assert parser.parse_args(["serve", "--port", "9000"]).port == 9000


def test_build_session_from_flags(tmp_path):
    source = Session()
    dispatch(source, "amy", "utter", "move up")
    dispatch(source, "amy", "utter", "move top")
    dispatch(source, "amy", "pick", "1")
    dispatch(source, "amy", "defaccept", "")
    source.persist(str(tmp_path / "saved"))

    parser = make_parser()
    args = parser.parse_args([
        "repl",
        "--grammar-log", str(tmp_path / "saved" / "grammar.jsonl"),
        "--params", str(tmp_path / "saved" / "params.json"),
        "--world", str(tmp_path / "saved" / "world.json"),
        "--seed-k", "7",
    ])
    session = build_session(args)
    assert session.beam == 7
    assert session.grammar.induced_rules()
    assert session.world == source.world
    assert session.params.weights == source.params.weights
    assert not session.records  # logs were not loaded, only artifacts


def test_build_session_from_state_dir(tmp_path):
    source = Session()
    run_script(source, write_script(tmp_path), io.StringIO())
    source.persist(str(tmp_path / "saved"))
    args = make_parser().parse_args(["repl", "--state", str(tmp_path / "saved")])
    session = build_session(args)
    assert len(session.records) == len(source.records)


def test_main_replay_writes_metrics_and_state(tmp_path, capsys):
    script = write_script(tmp_path)
    metrics_a = tmp_path / "a.csv"
    metrics_b = tmp_path / "b.csv"
    state_dir = tmp_path / "state"

    code = main(["replay", script, "--window", "5",
                 "--metrics-out", str(metrics_a),
                 "--state-out", str(state_dir)])
    assert code == 0
    out = capsys.readouterr().out
    assert CSV_HEADER in out
    assert "induced_rules 1" in out

    # flag-form argv without a subcommand infers replay mode; same bytes out
    code = main(["--replay", script, "--window", "5",
                 "--metrics-out", str(metrics_b), "--quiet"])
    assert code == 0
    assert capsys.readouterr().out == ""
    assert metrics_a.read_bytes() == metrics_b.read_bytes()
    assert (state_dir / "grammar.jsonl").exists()


def test_main_replay_needs_a_script():
    with pytest.raises(SystemExit):
        main(["replay"])


# -- the interactive loop -------------------------------------------------------------


def run_repl(commands, session=None):
    out = io.StringIO()
    final = repl(session or Session(), "me",
                 io.StringIO("".join(c + "\n" for c in commands)), out)
    return final, out.getvalue()


def test_repl_submit_accept_and_world():
    _, out = run_repl(["add red top", ":accept 1", ":world", ":quit"])
    assert "1. [+0.000] [ add red top ]" in out
    assert "applied: [ add red top ]" in out
    assert "height 1:" in out
    assert "r" in out


def test_repl_definition_flow():
    session, out = run_repl([
        "red tower",
        "add red top", ":accept 1",
        "add red top", ":accept 1",
        ":done",
        "red tower", ":accept 1",
        ":quit",
    ])
    assert "no parse for 'red tower'" in out
    assert "learned rule" in out
    assert session.records[-1].outcome == "accepted_induced"


def test_repl_reject_cancel_and_errors():
    _, out = run_repl([
        "add red", ":reject", ":cancel",
        ":accept 1",
        ":bogus",
        ":help",
        ":quit",
    ])
    assert "defining it" in out
    assert "definition dropped (depth 0)" in out
    assert "error: no candidates outstanding" in out
    assert "unknown command :bogus" in out
    assert ":demo K HEAD" in out


def test_repl_demo_and_metrics():
    _, out = run_repl([
        "add red top", ":accept 1",
        "add red top", ":accept 1",
        ":demo 2 double stack",
        ":metrics",
        ":grammar",
        ":quit",
    ])
    assert "learned rule" in out
    assert '"accepted_total": 2' in out
    assert "(by me, used 0)" in out


def test_repl_save_and_load(tmp_path):
    directory = str(tmp_path / "snap")
    session, out = run_repl([
        "add red top", ":accept 1",
        f":save {directory}",
        f":load {directory}",
        ":quit",
    ])
    assert f"saved to {directory}" in out
    assert f"loaded from {directory}" in out
    assert Position(0, 0, 1) in session.world.voxels
    assert len(session.records) == 1


def test_repl_switch_user():
    session, out = run_repl([":user zoe", "add red", ":accept 1", ":quit"])
    assert "now acting as zoe" in out
    assert session.records[-1].user == "zoe"
