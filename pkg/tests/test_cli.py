import pytest

from nsswipt.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_complexity_table(capsys):
    code, out, _ = run(capsys, "complexity-table", "--M", "8", "--KI", "2", "--KE", "2")
    assert code == 0
    assert len(out.splitlines()) == 6 and "91.431651" in out


def test_list_scenarios(capsys):
    code, out, _ = run(capsys, "list-scenarios")
    assert code == 0 and "fig9_waveform" in out


def test_unknown_scenario_exit_2(capsys):
    code, _, err = run(capsys, "run-scenario", "nope")
    assert code == 2 and "tab4_power_ratio" in err


def test_usage_errors_exit_2(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "solve", "--method", "bogus")[0] == 2
    assert run(capsys, "solve", "--config", "/nonexistent.cfg")[0] == 2
    assert run(capsys, "run-scenario", "tab4_power_ratio", "--trials", "0")[0] == 2


def test_infeasible_exit_1(tmp_path, capsys):
    cfg = tmp_path / "demo.cfg"
    cfg.write_text("[system]\nP_max = 0.0001\n")
    code, out, err = run(capsys, "solve", "--config", str(cfg), "--method", "alg2")
    assert code == 1 and "power shortfall" in err and "status INFEASIBLE" in out


def test_solve_ok(capsys):
    code, out, _ = run(capsys, "solve", "--method", "alg2", "--seed", "3")
    assert code == 0 and "eval worst_capacity" in out


def test_run_scenario_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["run-scenario", "tab4_power_ratio", "--seed", "7", "--trials", "3",
                     "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert len(lines) == 1 + 10 * 2 * 2
    c = tmp_path / "c.csv"
    main(["--seed", "8", "run-scenario", "tab4_power_ratio", "--trials", "3", "--out", str(c)])
    assert c.read_bytes() != a.read_bytes()


def test_scenario_file_and_plotdata(tmp_path, capsys):
    f = tmp_path / "s.ini"
    f.write_text("[scenario]\nname = mini\nmethods = alg2\nn_trials = 2\n"
                 "[system]\nM = 8\n[sweep]\nP_max = 1, 2\n")
    code, out, _ = run(capsys, "run-scenario", str(f), "--format", "plotdata")
    assert code == 0 and out.splitlines()[0] == "x,series,y,y_stderr"


@pytest.fixture(scope="module")
def server():
    import socket
    import threading
    import time

    import uvicorn

    from nsswipt.service.app import app

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    srv = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error"))
    th = threading.Thread(target=srv.run, daemon=True)
    th.start()
    for _ in range(100):
        if srv.started:
            break
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    srv.should_exit = True
    th.join(timeout=5)


def test_remote_matches_in_process(server, capsys):
    for argv in (["complexity-table", "--M", "16", "--KI", "4", "--KE", "4"],
                 ["solve", "--method", "alg1", "--seed", "2"],
                 ["run-scenario", "fig_csi", "--trials", "2", "--seed", "1"]):
        local = run(capsys, *argv)
        remote = run(capsys, "--server", server, *argv)
        assert local[0] == remote[0] == 0
        assert local[1] == remote[1]
    assert run(capsys, "--server", server, "run-scenario", "nope")[0] == 2
