"""Registry service logic: publish, discover, negotiate, SLA formation, delivery.

All public methods speak wire-format dicts (the JSON bodies of the HTTP
surface) so the HTTP layer stays a thin adapter. State is persisted through
a :class:`DocumentStore`; every mutation writes the affected entity before
returning.
"""
from __future__ import annotations

import threading
import uuid
from datetime import datetime, timezone

from ..serialize import (
    report_from_json,
    schema_from_json,
    sha256_hex,
    sls_from_json,
    sls_to_json,
    supply_from_json,
)
from ..sls import SchemaError, match_score, satisfies
from .store import DocumentStore


class RegistryError(Exception):
    """Protocol-level failure with a stable code and an HTTP-ish status."""

    def __init__(self, code: str, message: str, status: int = 400, path: str | None = None):
        super().__init__(message)
        self.code = code
        self.status = status
        self.path = path

    def to_json(self) -> dict:
        body = {"code": self.code, "message": str(self)}
        if self.path is not None:
            body["path"] = self.path
        return {"error": body}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _reject(message: str, path: str | None = None) -> RegistryError:
    return RegistryError("invalid_descriptor", message, 400, path)


def validate_descriptor(doc) -> None:
    """Structural validation of a descriptor document; raises with a field path."""
    if not isinstance(doc, dict):
        raise _reject("descriptor must be an object", "")
    service = doc.get("service")
    if not isinstance(service, str) or not service:
        raise _reject("missing or empty service name", "service")
    functionality = doc.get("functionality")
    if not isinstance(functionality, dict):
        raise _reject("missing functionality", "functionality")
    entry_points = functionality.get("entry_points")
    if not isinstance(entry_points, list) or not all(isinstance(e, str) for e in entry_points):
        raise _reject("entry_points must be a list of strings", "functionality.entry_points")
    try:
        schema = schema_from_json(doc.get("schema") or {})
    except SchemaError as exc:
        raise _reject(str(exc), "schema") from exc
    alternatives = doc.get("alternatives")
    if not isinstance(alternatives, list):
        raise _reject("alternatives must be a list", "alternatives")
    seen_keys: set[str] = set()
    for i, alt in enumerate(alternatives):
        where = f"alternatives[{i}]"
        if not isinstance(alt, dict):
            raise _reject("alternative must be an object", where)
        key = alt.get("alternative_key")
        if not isinstance(key, str) or not key:
            raise _reject("missing alternative_key", f"{where}.alternative_key")
        if key in seen_keys:
            raise _reject(
                f"duplicate alternative_key {key!r}", f"{where}.alternative_key"
            )
        seen_keys.add(key)
        try:
            offered = sls_from_json(alt.get("offered_sls") or {})
            schema.check(offered)
        except SchemaError as exc:
            raise _reject(str(exc), f"{where}.offered_sls") from exc
        report = alt.get("demand_report")
        if not isinstance(report, dict) or "entry_points" not in report:
            raise _reject("missing demand_report", f"{where}.demand_report")
        if sorted(report["entry_points"]) != sorted(entry_points):
            raise _reject(
                "demand report entry points differ from functionality entry points",
                f"{where}.demand_report.entry_points",
            )
        artifact = alt.get("artifact")
        digest = alt.get("artifact_digest")
        if not isinstance(artifact, str):
            raise _reject("missing artifact source", f"{where}.artifact")
        if not isinstance(digest, str) or len(digest) != 64:
            raise _reject("missing artifact_digest", f"{where}.artifact_digest")
        if sha256_hex(artifact.encode("utf-8")) != digest:
            raise _reject(
                "artifact_digest does not match artifact content",
                f"{where}.artifact_digest",
            )


class Registry:
    """The registry: durable descriptor store plus per-consumer negotiation."""

    def __init__(self, store_dir):
        self.store = DocumentStore(store_dir)
        self._lock = threading.RLock()
        self._services = self.store.load_all("services")
        self._sessions = self.store.load_all("sessions")
        self._slas = self.store.load_all("slas")

    # -- publication --------------------------------------------------------

    def publish(self, descriptor: dict) -> str:
        validate_descriptor(descriptor)
        with self._lock:
            service_id = f"svc-{len(self._services) + 1:04d}"
            name = descriptor["service"]
            version = 1 + sum(1 for rec in self._services.values() if rec["name"] == name)
            record = {
                "service_id": service_id,
                "name": name,
                "version": version,
                "descriptor": descriptor,
                "published_at": _now(),
            }
            self.store.write("services", service_id, record)
            self._services[service_id] = record
            return service_id

    def list_services(self) -> list[dict]:
        with self._lock:
            return [
                {
                    "service_id": rec["service_id"],
                    "name": rec["name"],
                    "version": rec["version"],
                }
                for _, rec in sorted(self._services.items())
            ]

    def _latest(self, name: str) -> dict | None:
        best = None
        for rec in self._services.values():
            if rec["name"] != name:
                continue
            if best is None or rec["version"] > best["version"]:
                best = rec
        return best

    def get_service(self, service_id: str) -> dict:
        with self._lock:
            rec = self._services.get(service_id)
        if rec is None:
            raise RegistryError("unknown_service", f"no service {service_id!r}", 404)
        return rec

    # -- matching -----------------------------------------------------------

    def _evaluate(self, record: dict, supply_doc: dict, requested_doc: dict):
        """Fit-filter and score every alternative of a service record."""
        descriptor = record["descriptor"]
        schema = schema_from_json(descriptor["schema"])
        try:
            requested = sls_from_json(requested_doc)
            schema.check(requested)
        except SchemaError as exc:
            raise RegistryError("schema_mismatch", str(exc), 400) from exc
        supply = supply_from_json(supply_doc)
        fitting = []
        for alt in descriptor["alternatives"]:
            report = report_from_json(alt["demand_report"])
            if not report.fits(supply):
                continue
            offered = sls_from_json(alt["offered_sls"])
            score = match_score(offered, requested, schema)
            fitting.append((alt, offered, score))
        fitting.sort(key=lambda t: (t[2].sort_key(), t[0]["alternative_key"]))
        satisfiers = [
            t for t in fitting if satisfies(t[1], requested, schema)
        ]
        return fitting, satisfiers

    @staticmethod
    def _proposals(fitting) -> list[dict]:
        return [
            {
                "alternative_key": alt["alternative_key"],
                "offered_sls": sls_to_json(offered),
                "score": {"satisfied": score.satisfied, "gap": score.gap},
            }
            for alt, offered, score in fitting
        ]

    def discover(self, functionality: str, supply: dict, requested_sls: dict) -> dict:
        with self._lock:
            record = self._latest(functionality)
            if record is None:
                return {"outcome": "no_fit", "reason": "unknown service"}
            fitting, satisfiers = self._evaluate(record, supply, requested_sls)
            if not fitting:
                return {"outcome": "no_fit", "reason": "no alternative fits the resource supply"}
            session = {
                "session_id": str(uuid.uuid4()),
                "service_id": record["service_id"],
                "state": "Open",
                "round": 0,
                "supply": supply,
                "requested_sls": requested_sls,
                "proposals": self._proposals(fitting),
                "history": [],
                "sla_id": None,
                "created_at": _now(),
                "updated_at": _now(),
            }
            if satisfiers:
                return self._agree(record, session, satisfiers[0])
            session["history"].append({"round": 0, "proposals": session["proposals"]})
            self._write_session(session)
            return {
                "outcome": "negotiate",
                "session_id": session["session_id"],
                "service_id": record["service_id"],
                "proposals": session["proposals"],
            }

    # -- negotiation --------------------------------------------------------

    def _open_session(self, session_id: str) -> dict:
        session = self._sessions.get(session_id)
        if session is None:
            raise RegistryError("unknown_session", f"no session {session_id!r}", 404)
        if session["state"] != "Open":
            raise RegistryError(
                "session_closed", f"session is {session['state']}", 409
            )
        return session

    def counter(self, session_id: str, requested_sls: dict) -> dict:
        with self._lock:
            session = self._open_session(session_id)
            record = self._services[session["service_id"]]
            fitting, satisfiers = self._evaluate(record, session["supply"], requested_sls)
            session["round"] += 1
            session["requested_sls"] = requested_sls
            session["updated_at"] = _now()
            if not fitting:
                session["state"] = "Failed"
                self._write_session(session)
                return {"outcome": "no_fit", "reason": "no alternative fits the resource supply"}
            if satisfiers:
                return self._agree(record, session, satisfiers[0])
            session["proposals"] = self._proposals(fitting)
            session["history"].append(
                {"round": session["round"], "proposals": session["proposals"]}
            )
            self._write_session(session)
            return {
                "outcome": "negotiate",
                "session_id": session["session_id"],
                "service_id": record["service_id"],
                "proposals": session["proposals"],
            }

    def accept(self, session_id: str, alternative_key: str) -> dict:
        with self._lock:
            session = self._open_session(session_id)
            record = self._services[session["service_id"]]
            proposed = {p["alternative_key"] for p in session["proposals"]}
            if alternative_key not in proposed:
                raise RegistryError(
                    "not_proposed",
                    f"alternative {alternative_key!r} was not proposed in the current round",
                    409,
                )
            chosen = next(
                (alt, sls_from_json(alt["offered_sls"]), None)
                for alt in record["descriptor"]["alternatives"]
                if alt["alternative_key"] == alternative_key
            )
            outcome = self._agree(record, session, chosen)
            return outcome["sla"]

    def abort(self, session_id: str) -> dict:
        with self._lock:
            session = self._open_session(session_id)
            session["state"] = "Failed"
            session["updated_at"] = _now()
            self._write_session(session)
            return {"session_id": session_id, "state": "Failed"}

    def _agree(self, record: dict, session: dict, chosen) -> dict:
        alt, offered, _score = chosen
        sla_id = f"sla-{len(self._slas) + 1:04d}"
        sla = {
            "sla_id": sla_id,
            "service_id": record["service_id"],
            "alternative_key": alt["alternative_key"],
            # Contract terms are the published offered SLS, verbatim.
            "terms": alt["offered_sls"],
            "supply": session["supply"],
            "artifact_digest": alt["artifact_digest"],
            "agreed_at": _now(),
        }
        session["state"] = "Agreed"
        session["sla_id"] = sla_id
        session["proposals"] = [
            {
                "alternative_key": alt["alternative_key"],
                "offered_sls": alt["offered_sls"],
                "score": None,
            }
        ]
        session["history"].append({"round": session["round"], "match": alt["alternative_key"]})
        session["updated_at"] = _now()
        self.store.write("slas", sla_id, sla)
        self._slas[sla_id] = sla
        self._write_session(session)
        return {
            "outcome": "match",
            "session_id": session["session_id"],
            "service_id": record["service_id"],
            "alternative_key": alt["alternative_key"],
            "sla": sla,
        }

    def _write_session(self, session: dict) -> None:
        self.store.write("sessions", session["session_id"], session)
        self._sessions[session["session_id"]] = session

    # -- delivery -----------------------------------------------------------

    def fetch_artifact(self, service_id: str, alternative_key: str, session_id: str):
        """Deliver the tailored artifact; requires an Agreed session for it."""
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise RegistryError("unknown_session", f"no session {session_id!r}", 404)
            if session["state"] != "Agreed":
                raise RegistryError(
                    "not_agreed", "artifact delivery requires an agreed session", 403
                )
            if session["service_id"] != service_id:
                raise RegistryError("not_agreed", "session is for a different service", 403)
            sla = self._slas[session["sla_id"]]
            if sla["alternative_key"] != alternative_key:
                raise RegistryError(
                    "not_agreed", "session agreement covers a different alternative", 403
                )
            record = self._services[service_id]
            for alt in record["descriptor"]["alternatives"]:
                if alt["alternative_key"] == alternative_key:
                    data = alt["artifact"].encode("utf-8")
                    if sha256_hex(data) != alt["artifact_digest"]:
                        raise RegistryError(
                            "integrity", "stored artifact does not match its digest", 500
                        )
                    return data, alt["artifact_digest"]
            raise RegistryError("unknown_alternative", f"no alternative {alternative_key!r}", 404)

    # -- introspection used by tests and tooling ----------------------------

    def session_state(self, session_id: str) -> dict:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise RegistryError("unknown_session", f"no session {session_id!r}", 404)
            return dict(session)

    def all_slas(self) -> dict[str, dict]:
        with self._lock:
            return dict(self._slas)
