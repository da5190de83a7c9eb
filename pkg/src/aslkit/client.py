"""Consumer agent: negotiation policies, the discovery loop, deployment."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import httpx

from .analysis import Binding, analyze_method
from .parser import ParseError, parse
from .resources import ResourceSupply, fits
from .serialize import sha256_hex, sls_from_json, sls_to_json
from .sls import Level, SlsSchema, weaken, worst_level
from .validate import validate


class ClientError(Exception):
    pass


class NetworkError(ClientError):
    pass


class IntegrityError(ClientError):
    pass


class ProtocolError(ClientError):
    """The registry rejected a request."""

    def __init__(self, code: str, message: str, status: int):
        super().__init__(message)
        self.code = code
        self.status = status


class DeploymentRefused(ClientError):
    def __init__(self, failures):
        names = ", ".join(f.describe() for f in failures)
        super().__init__(f"artifact demand does not fit the local supply: {names}")
        self.failures = failures


# --- negotiation policies --------------------------------------------------


@dataclass(frozen=True)
class AcceptFirstFeasible:
    """Accept the registry's top-scored proposal immediately."""


@dataclass(frozen=True)
class AbortOnMismatch:
    """Abort as soon as the registry cannot fully satisfy the request."""


@dataclass(frozen=True)
class RelaxByPriority:
    """Weaken the request one level per round, lowest-priority dimension first."""

    priority: tuple[str, ...]
    max_rounds: int = 8

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


Policy = AcceptFirstFeasible | AbortOnMismatch | RelaxByPriority


def relax_requested(
    requested: dict[str, Level],
    policy: RelaxByPriority,
    proposals: list[dict],
    schema: SlsSchema,
) -> dict[str, Level] | None:
    """One relaxation step; returns the weakened request or None for give-up.

    A dimension is violated when the best proposal does not meet it. The
    lowest-priority violated dimension is weakened one level toward its worst;
    dimensions already at worst are dropped on the way. A step that cannot
    weaken anything is a give-up.
    """
    if not requested:
        return None
    top_offer = sls_from_json(proposals[0]["offered_sls"]) if proposals else {}

    def is_violated(name: str) -> bool:
        if name not in top_offer:
            return True
        polarity = schema.polarity(name)
        offered, wanted = top_offer[name], requested[name]
        if polarity.value == "HigherBetter":
            return offered < wanted
        return offered > wanted

    def priority_index(name: str) -> tuple[int, str]:
        try:
            return (self_priority.index(name), name)
        except ValueError:
            return (len(self_priority), name)

    self_priority = list(policy.priority)
    violated = sorted((n for n in requested if is_violated(n)), key=priority_index)
    out = dict(requested)
    while violated:
        name = violated.pop()  # lowest priority last
        polarity = schema.polarity(name)
        if out[name] == worst_level(polarity):
            del out[name]
            continue
        out[name] = weaken(out[name], polarity)
        return out
    return None


# --- registry transports ---------------------------------------------------


class LocalTransport:
    """In-process transport wrapping a :class:`Registry` instance."""

    def __init__(self, registry):
        self.registry = registry

    def discover(self, functionality, supply, requested_sls):
        return self._call(self.registry.discover, functionality, supply, requested_sls)

    def counter(self, session_id, requested_sls):
        return self._call(self.registry.counter, session_id, requested_sls)

    def accept(self, session_id, alternative_key):
        return self._call(self.registry.accept, session_id, alternative_key)

    def abort(self, session_id):
        return self._call(self.registry.abort, session_id)

    def fetch(self, service_id, alternative_key, session_id):
        return self._call(
            self.registry.fetch_artifact, service_id, alternative_key, session_id
        )

    @staticmethod
    def _call(fn, *args):
        from .registry.core import RegistryError

        try:
            return fn(*args)
        except RegistryError as exc:
            raise ProtocolError(exc.code, str(exc), exc.status) from exc


class HttpTransport:
    """Transport over the registry's HTTP surface."""

    RETRIES = 3

    def __init__(self, base_url: str, client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.client = client or httpx.Client(base_url=self.base_url, timeout=30.0)

    def _check(self, response: httpx.Response):
        if response.status_code >= 400:
            try:
                err = response.json()["error"]
            except Exception:
                raise ProtocolError("http_error", response.text, response.status_code)
            raise ProtocolError(err.get("code", "error"), err.get("message", ""), response.status_code)
        return response

    def discover(self, functionality, supply, requested_sls):
        payload = {
            "functionality": functionality,
            "supply": supply,
            "requested_sls": requested_sls,
        }
        # Discovery is idempotent on failure paths, so transport errors retry.
        last: Exception | None = None
        for _ in range(self.RETRIES):
            try:
                return self._check(self.client.post("/discover", json=payload)).json()
            except httpx.TransportError as exc:
                last = exc
        raise NetworkError(f"discover failed after {self.RETRIES} attempts: {last}")

    def counter(self, session_id, requested_sls):
        try:
            response = self.client.post(
                f"/sessions/{session_id}/counter", json={"requested_sls": requested_sls}
            )
        except httpx.TransportError as exc:
            raise NetworkError(str(exc)) from exc
        return self._check(response).json()

    def accept(self, session_id, alternative_key):
        try:
            response = self.client.post(
                f"/sessions/{session_id}/accept", json={"alternative_key": alternative_key}
            )
        except httpx.TransportError as exc:
            raise NetworkError(str(exc)) from exc
        return self._check(response).json()

    def abort(self, session_id):
        try:
            response = self.client.post(f"/sessions/{session_id}/abort")
        except httpx.TransportError as exc:
            raise NetworkError(str(exc)) from exc
        return self._check(response).json()

    def fetch(self, service_id, alternative_key, session_id):
        try:
            response = self.client.get(
                f"/services/{service_id}/alternatives/{alternative_key}/artifact",
                params={"session_id": session_id},
            )
        except httpx.TransportError as exc:
            raise NetworkError(str(exc)) from exc
        self._check(response)
        return response.content, response.headers.get("X-Artifact-Digest", "")


# --- the discovery/negotiation loop ---------------------------------------


@dataclass
class NegotiationResult:
    status: str  # "agreed" | "no_fit" | "no_agreement"
    sla: dict | None = None
    artifact: bytes | None = None
    transcript: list[dict] = field(default_factory=list)
    reason: str = ""


def _fetch_verified(transport, outcome) -> bytes:
    sla = outcome["sla"]
    data, digest = transport.fetch(
        outcome["service_id"], outcome["alternative_key"], outcome["session_id"]
    )
    expected = sla.get("artifact_digest", digest)
    if sha256_hex(data) != expected or (digest and digest != expected):
        raise IntegrityError("fetched artifact does not match the agreed digest")
    return data


def run_discovery(
    transport,
    functionality: str,
    supply: dict,
    requested_sls: dict,
    policy: Policy,
    schema: SlsSchema,
    transcript_path: str | Path | None = None,
) -> NegotiationResult:
    """Drive discover -> (counter)* -> accept -> fetch under a policy."""
    transcript: list[dict] = []

    def log(round_no, sent, received, decision):
        transcript.append(
            {"round": round_no, "sent": sent, "received": received, "decision": decision}
        )

    def finish(result: NegotiationResult) -> NegotiationResult:
        result.transcript = transcript
        if transcript_path is not None:
            lines = "".join(json.dumps(entry, sort_keys=True) + "\n" for entry in transcript)
            Path(transcript_path).write_text(lines, encoding="utf-8")
        return result

    requested = sls_from_json(requested_sls)
    sent = {
        "functionality": functionality,
        "supply": supply,
        "requested_sls": sls_to_json(requested),
    }
    outcome = transport.discover(functionality, supply, sls_to_json(requested))
    round_no = 0
    while True:
        if outcome["outcome"] == "match":
            log(round_no, sent, outcome, "fetch")
            artifact = _fetch_verified(transport, outcome)
            return finish(NegotiationResult("agreed", outcome["sla"], artifact))
        if outcome["outcome"] == "no_fit":
            log(round_no, sent, outcome, "stop")
            return finish(NegotiationResult("no_fit", reason=outcome.get("reason", "")))

        # Negotiate.
        session_id = outcome["session_id"]
        proposals = outcome["proposals"]
        if isinstance(policy, AcceptFirstFeasible):
            key = proposals[0]["alternative_key"]
            log(round_no, sent, outcome, f"accept {key}")
            sla = transport.accept(session_id, key)
            match = {
                "outcome": "match",
                "session_id": session_id,
                "service_id": outcome["service_id"],
                "alternative_key": key,
                "sla": sla,
            }
            artifact = _fetch_verified(transport, match)
            return finish(NegotiationResult("agreed", sla, artifact))
        if isinstance(policy, AbortOnMismatch):
            log(round_no, sent, outcome, "abort")
            transport.abort(session_id)
            return finish(NegotiationResult("no_agreement", reason="offer does not satisfy the request"))
        if isinstance(policy, RelaxByPriority):
            if round_no >= policy.max_rounds:
                log(round_no, sent, outcome, "abort (max rounds)")
                transport.abort(session_id)
                return finish(NegotiationResult("no_agreement", reason="max rounds exhausted"))
            relaxed = relax_requested(requested, policy, proposals, schema)
            if relaxed is None:
                log(round_no, sent, outcome, "abort (give up)")
                transport.abort(session_id)
                return finish(NegotiationResult("no_agreement", reason="nothing left to relax"))
            log(round_no, sent, outcome, f"counter {sls_to_json(relaxed)}")
            requested = relaxed
            round_no += 1
            sent = {"session_id": session_id, "requested_sls": sls_to_json(relaxed)}
            outcome = transport.counter(session_id, sls_to_json(relaxed))
            continue
        raise TypeError(f"unknown policy {policy!r}")


# --- deployment ------------------------------------------------------------


def deploy(
    artifact: bytes,
    local_supply: ResourceSupply,
    dest_dir: str | Path,
    sla: dict | None = None,
) -> Path:
    """Re-validate and re-analyze an artifact locally, then install it.

    The artifact must be plain (no adaptation constructs) and every one of its
    methods must fit the local supply; a registry cannot be trusted to have
    checked that honestly.
    """
    try:
        program = parse(artifact.decode("utf-8"))
    except (ParseError, UnicodeDecodeError) as exc:
        raise ClientError(f"artifact does not parse as plain ASL: {exc}") from exc
    if not program.is_plain():
        raise ClientError("artifact still contains adaptation constructs")
    diagnostics = [d for d in validate(program) if d.severity == "error"]
    if diagnostics:
        raise ClientError(f"artifact fails validation: {diagnostics[0].message}")

    binding = Binding({})
    failures = []
    for cls, method in program.all_method_names():
        demand = analyze_method(program, binding, cls, method)
        result = fits(demand, local_supply)
        if not result:
            failures.extend(result.failures)
    if failures:
        raise DeploymentRefused(failures)

    digest = sha256_hex(artifact)
    dest = Path(dest_dir)
    dest.mkdir(parents=True, exist_ok=True)
    stem = f"{program.name or 'service'}_{digest[:12]}"
    artifact_path = dest / f"{stem}.asl"
    artifact_path.write_bytes(artifact)
    manifest = {
        "sla_id": (sla or {}).get("sla_id"),
        "digest": digest,
        "artifact": artifact_path.name,
        "deployed_at": datetime.now(timezone.utc).isoformat(),
    }
    (dest / f"{stem}.manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return artifact_path
