import io
import json
import socket
import threading

import pytest

from reqlift.gr1 import Unrealizable, build_gr1, check_realizability
from reqlift.session import SessionCore, SessionServer


@pytest.fixture(scope="module")
def server_parts(compiled):
    spec = build_gr1([(cf.formula, cf.doc.source_tag) for cf in compiled.formulas],
                     compiled.symbols)
    verdict = check_realizability(spec)
    assert isinstance(verdict, Unrealizable)
    requirements = [{"id": cf.doc.id, "source": cf.doc.source_tag,
                     "text": cf.doc.text} for cf in compiled.formulas]
    return spec, verdict.counterstrategy, requirements


def _core(server_parts, tmp_path):
    spec, cs, reqs = server_parts
    return SessionCore(spec, cs, reqs, str(tmp_path), token="t1")


def _outputs(core, mode, inputs=None):
    """A typed output valuation consistent with the definitions."""
    io_ = core.io
    arena = core.game.arena
    i_mask = arena.mask_of_inputs(core.game.current_inputs)
    enc = io_.enc
    coding = enc.enums["Regulator_Mode"]
    want = dict(zip(coding.bits, coding.patterns[mode]))
    for o_mask in arena._outputs_by_input[i_mask]:
        pos = i_mask | o_mask
        val = {a: bool(pos >> i & 1) for i, a in enumerate(arena.atoms)}
        if all(val[b] == v for b, v in want.items()):
            return io_.from_atoms(val, io_.output_vars)
    raise AssertionError(f"no consistent outputs with mode {mode}")


def test_typed_io_round_trip(server_parts, tmp_path):
    core = _core(server_parts, tmp_path)
    io_ = core.io
    assert "Regulator_Init_Timeout" in io_.input_vars
    assert "Regulator_Mode" in io_.output_vars
    typed = _outputs(core, "INIT")
    atoms = io_.to_atoms(typed, io_.output_vars)
    assert io_.from_atoms(atoms, io_.output_vars) == typed


def test_hello_lists_io_and_first_move(server_parts, tmp_path):
    core = _core(server_parts, tmp_path)
    init, move = core.hello()
    assert init.kind == "game_init"
    names = {d["name"] for d in init.payload["outputs"]}
    assert "Regulator_Mode" in names and "Regulator_Status" in names
    assert move.kind == "env_move"
    assert move.payload["inputs"]["Regulator_Init_Timeout"] is True
    # the forced wires ride along so the client can highlight them
    assert move.payload["derived"]["Regulator_Status"] is True


def test_clash_round_names_both_requirements(server_parts, tmp_path):
    core = _core(server_parts, tmp_path)
    core.hello()
    ok = core.handle({"seq": 1, "kind": "user_move",
                      "payload": {"outputs": _outputs(core, "INIT")}})
    assert ok[0].kind == "verdict" and ok[0].payload["result"] == "ok"
    normal = core.handle({"seq": 2, "kind": "user_move",
                          "payload": {"outputs": _outputs(core, "NORMAL")}})
    verdict = normal[0].payload
    assert verdict["result"] == "violation"
    assert {v["source"] for v in verdict["violated"]} == {"Req MRM 4"}
    # a violation opens the mining phase
    kinds = [m.kind for m in normal]
    assert "proposal" in kinds


def test_failed_reply_names_mrm2(server_parts, tmp_path):
    core = _core(server_parts, tmp_path)
    core.hello()
    core.handle({"seq": 1, "kind": "user_move",
                 "payload": {"outputs": _outputs(core, "INIT")}})
    failed = core.handle({"seq": 2, "kind": "user_move",
                          "payload": {"outputs": _outputs(core, "FAILED")}})
    assert {v["source"] for v in failed[0].payload["violated"]} == {"Req MRM 2"}


def test_missing_output_is_error_and_session_continues(server_parts, tmp_path):
    core = _core(server_parts, tmp_path)
    core.hello()
    bad = core.handle({"seq": 1, "kind": "user_move",
                       "payload": {"outputs": {"Regulator_Status": True}}})
    assert bad[0].payload["result"] == "error"
    ok = core.handle({"seq": 2, "kind": "user_move",
                      "payload": {"outputs": _outputs(core, "INIT")}})
    assert ok[0].payload["result"] == "ok"


def test_accept_reaches_realizable_with_machine(server_parts, tmp_path):
    core = _core(server_parts, tmp_path)
    core.hello()
    msgs = core.handle({"seq": 1, "kind": "status",
                        "payload": {"action": "propose"}})
    assert msgs[0].kind == "proposal"
    rank = msgs[0].payload["rank"]
    done = core.handle({"seq": 2, "kind": "accept", "payload": {"rank": rank}})
    assert done[0].kind == "status"
    assert done[0].payload["status"] == "realizable"
    assert (tmp_path / "moore_machine.json").exists()


def test_reject_all_exhausts(server_parts, tmp_path):
    core = _core(server_parts, tmp_path)
    core.hello()
    msgs = core.handle({"seq": 1, "kind": "status",
                        "payload": {"action": "propose"}})
    while msgs[0].kind == "proposal":
        msgs = core.handle({"seq": 2, "kind": "reject",
                            "payload": {"rank": msgs[0].payload["rank"]}})
    assert msgs[0].payload["status"] == "exhausted"


def test_sequence_numbers_increase(server_parts, tmp_path):
    core = _core(server_parts, tmp_path)
    out = core.hello()
    out += core.handle({"seq": 1, "kind": "user_move",
                        "payload": {"outputs": _outputs(core, "INIT")}})
    seqs = [m.seq for m in out]
    assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)


def test_stdio_transport(server_parts, tmp_path):
    spec, cs, reqs = server_parts
    server = SessionServer(spec, cs, reqs, str(tmp_path))
    probe = SessionCore(spec, cs, reqs, str(tmp_path))
    reply = _outputs(probe, "INIT")
    stdin = io.StringIO(json.dumps(
        {"seq": 1, "kind": "user_move", "payload": {"outputs": reply}}) + "\n")
    stdout = io.StringIO()
    server.run_stdio(stdin=stdin, stdout=stdout)
    lines = [json.loads(l) for l in stdout.getvalue().splitlines()]
    kinds = [l["kind"] for l in lines]
    assert kinds[0] == "game_init" and kinds[1] == "env_move"
    assert "verdict" in kinds


def test_tcp_transport_and_resume(server_parts, tmp_path):
    spec, cs, reqs = server_parts
    server = SessionServer(spec, cs, reqs, str(tmp_path))
    ready = threading.Event()
    port_holder = {}

    def run():
        srv = socket.create_server(("127.0.0.1", 0))
        port_holder["port"] = srv.getsockname()[1]
        ready.set()
        conn, _ = srv.accept()
        server._tcp_client(conn)

    threading.Thread(target=run, daemon=True).start()
    ready.wait(timeout=5)
    with socket.create_connection(("127.0.0.1", port_holder["port"]),
                                  timeout=5) as sock:
        reader = sock.makefile("r", encoding="utf-8")
        init = json.loads(reader.readline())
        move = json.loads(reader.readline())
        assert init["kind"] == "game_init"
        assert move["kind"] == "env_move"
        token = init["payload"]["session"]
        sock.sendall((json.dumps({
            "seq": 1, "kind": "status",
            "payload": {"action": "resume", "session": token}}) + "\n").encode())
        replay_first = json.loads(reader.readline())
        assert replay_first["seq"] == 1
        assert replay_first["kind"] == "game_init"
