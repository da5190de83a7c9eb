import json
import socket
import threading
import time
from pathlib import Path

import pytest
from click.testing import CliRunner

from aslkit.cli import main

WIFI_BINDING = "Connection.connect=Wifi,Connection.send=Wifi"


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def corpus(corpus_dir):
    return {
        "asl": str(corpus_dir / "connection.asl"),
        "schema": str(corpus_dir / "schema.json"),
        "rules": str(corpus_dir / "rules.json"),
        "profile": str(corpus_dir / "profile.json"),
        "supply_wifi": str(corpus_dir / "supply_wifi.json"),
        "requested": str(corpus_dir / "requested_cost_low.json"),
    }


class TestCheck:
    def test_valid_corpus(self, runner, corpus):
        result = runner.invoke(main, ["check", corpus["asl"]])
        assert result.exit_code == 0
        assert "ok" in result.output

    def test_syntax_error_exits_2_with_position(self, runner, tmp_path):
        bad = tmp_path / "bad.asl"
        bad.write_text("class C {")
        result = runner.invoke(main, ["check", str(bad)])
        assert result.exit_code == 2
        assert f"{bad}:" in result.stderr
        assert "error[" in result.stderr

    def test_validation_error_exits_2(self, runner, tmp_path):
        bad = tmp_path / "bad.asl"
        bad.write_text("adaptable class C { adaptable fn m(); }")
        result = runner.invoke(main, ["check", str(bad)])
        assert result.exit_code == 2
        assert "E001_UNCOVERED_METHOD" in result.stderr

    def test_profile_kind_conflict_exits_2(self, runner, corpus, tmp_path):
        bad = tmp_path / "bad.asl"
        # Energy is additive in the profile, but reserve treats it as maximal.
        bad.write_text("class C { fn m() { reserve Energy 5; } }")
        result = runner.invoke(
            main, ["--profile", corpus["profile"], "check", str(bad)]
        )
        assert result.exit_code == 2
        assert "E007_KIND_CONFLICT" in result.stderr


class TestAnalyze:
    def test_wifi_binding_report(self, runner, corpus):
        result = runner.invoke(
            main, ["analyze", corpus["asl"], "--binding", WIFI_BINDING]
        )
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["binding"] == WIFI_BINDING
        connect = doc["report"]["entry_points"]["Connection.connect"]
        assert connect["additive"] == {"Energy": 2}
        assert connect["presence"] == ["WiFiAdapter"]

    def test_offered_sls_included_with_schema_and_rules(self, runner, corpus):
        result = runner.invoke(
            main,
            [
                "--schema",
                corpus["schema"],
                "--rules",
                corpus["rules"],
                "analyze",
                corpus["asl"],
                "--binding",
                WIFI_BINDING,
            ],
        )
        assert result.exit_code == 0
        assert json.loads(result.output)["offered_sls"] == {
            "Cost": "High",
            "Speed": "High",
        }

    def test_bogus_binding_exits_2(self, runner, corpus):
        result = runner.invoke(
            main, ["analyze", corpus["asl"], "--binding", "Connection.send=Nope"]
        )
        assert result.exit_code == 2


class TestEnumerate:
    def test_lists_four_bindings(self, runner, corpus):
        result = runner.invoke(main, ["--json", "enumerate", corpus["asl"]])
        assert result.exit_code == 0
        keys = json.loads(result.output)
        assert len(keys) == 4
        assert keys == sorted(keys)

    def test_cap_exceeded_exits_2(self, runner, corpus):
        result = runner.invoke(main, ["enumerate", corpus["asl"], "--cap", "3"])
        assert result.exit_code == 2


class TestTailor:
    def test_writes_plain_source(self, runner, corpus, tmp_path):
        out = tmp_path / "plain.asl"
        result = runner.invoke(
            main,
            ["tailor", corpus["asl"], "--binding", WIFI_BINDING, "-o", str(out)],
        )
        assert result.exit_code == 0
        text = out.read_text()
        assert "adaptable" not in text
        assert "WiFiAdapter" in text
        assert "sha256" in result.output

    def test_stdout_mode(self, runner, corpus):
        result = runner.invoke(main, ["tailor", corpus["asl"], "--binding", WIFI_BINDING])
        assert result.exit_code == 0
        assert result.output.startswith("service Connection;")


class TestDescriptor:
    def test_builds_and_reports_alternatives(self, runner, corpus, tmp_path):
        out = tmp_path / "descriptor.json"
        result = runner.invoke(
            main,
            [
                "--schema",
                corpus["schema"],
                "--rules",
                corpus["rules"],
                "descriptor",
                corpus["asl"],
                "-o",
                str(out),
            ],
        )
        assert result.exit_code == 0
        doc = json.loads(out.read_text())
        assert doc["service"] == "Connection"
        assert len(doc["alternatives"]) >= 2

    def test_schema_required(self, runner, corpus):
        result = runner.invoke(main, ["descriptor", corpus["asl"]])
        assert result.exit_code == 2
        assert "--schema" in result.stderr


class TestDeployCommand:
    def test_deploy_tailored_artifact(self, runner, corpus, tmp_path):
        plain = tmp_path / "plain.asl"
        runner.invoke(
            main, ["tailor", corpus["asl"], "--binding", WIFI_BINDING, "-o", str(plain)]
        )
        result = runner.invoke(
            main,
            [
                "deploy",
                str(plain),
                "--supply",
                corpus["supply_wifi"],
                "--dest",
                str(tmp_path / "deployed"),
            ],
        )
        assert result.exit_code == 0
        assert Path(result.output.strip()).exists()

    def test_deploy_refused_exits_3(self, runner, corpus, corpus_dir, tmp_path):
        plain = tmp_path / "plain.asl"
        runner.invoke(
            main, ["tailor", corpus["asl"], "--binding", WIFI_BINDING, "-o", str(plain)]
        )
        result = runner.invoke(
            main,
            [
                "deploy",
                str(plain),
                "--supply",
                str(corpus_dir / "supply_bluetooth.json"),
                "--dest",
                str(tmp_path / "deployed"),
            ],
        )
        assert result.exit_code == 3
        assert "WiFiAdapter" in result.stderr

    def test_adaptable_artifact_exits_2(self, runner, corpus, tmp_path):
        result = runner.invoke(
            main,
            [
                "deploy",
                corpus["asl"],
                "--supply",
                corpus["supply_wifi"],
                "--dest",
                str(tmp_path / "deployed"),
            ],
        )
        assert result.exit_code == 2


@pytest.fixture(scope="module")
def live_registry(tmp_path_factory):
    """A real uvicorn server on a free port, for end-to-end CLI flows."""
    import uvicorn

    from aslkit.registry.core import Registry
    from aslkit.registry.http import create_app

    store = tmp_path_factory.mktemp("store")
    app = create_app(Registry(store))
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("registry server did not start")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


class TestNetworkedFlow:
    def test_publish_then_discover_and_deploy(
        self, runner, corpus, live_registry, tmp_path
    ):
        desc = tmp_path / "descriptor.json"
        result = runner.invoke(
            main,
            [
                "--schema",
                corpus["schema"],
                "--rules",
                corpus["rules"],
                "descriptor",
                corpus["asl"],
                "-o",
                str(desc),
            ],
        )
        assert result.exit_code == 0

        result = runner.invoke(
            main, ["--registry", live_registry, "publish", str(desc)]
        )
        assert result.exit_code == 0
        assert result.output.strip().startswith("svc-")

        deploy_dir = tmp_path / "deployed"
        transcript = tmp_path / "trace.jsonl"
        result = runner.invoke(
            main,
            [
                "--schema",
                corpus["schema"],
                "--registry",
                live_registry,
                "discover",
                "--functionality",
                "Connection",
                "--supply",
                corpus["supply_wifi"],
                "--requested",
                corpus["requested"],
                "--policy",
                "accept-first",
                "--transcript",
                str(transcript),
                "--deploy-dir",
                str(deploy_dir),
            ],
        )
        assert result.exit_code == 0, result.output + result.stderr
        summary = json.loads(result.output)
        assert summary["status"] == "agreed"
        assert summary["sla"]["terms"] == {"Cost": "High", "Speed": "High"}
        assert Path(summary["deployed"]).exists()
        assert transcript.exists()

    def test_no_agreement_exits_3(self, runner, corpus, live_registry, tmp_path):
        result = runner.invoke(
            main,
            [
                "--schema",
                corpus["schema"],
                "--registry",
                live_registry,
                "discover",
                "--functionality",
                "Connection",
                "--supply",
                corpus["supply_wifi"],
                "--requested",
                corpus["requested"],
                "--policy",
                "abort",
            ],
        )
        assert result.exit_code == 3
        assert json.loads(result.output)["status"] == "no_agreement"

    def test_unreachable_registry_exits_5(self, runner, corpus):
        result = runner.invoke(
            main,
            [
                "--schema",
                corpus["schema"],
                "--registry",
                "http://127.0.0.1:9",
                "discover",
                "--functionality",
                "Connection",
                "--supply",
                corpus["supply_wifi"],
                "--requested",
                corpus["requested"],
            ],
        )
        assert result.exit_code == 5
