"""Shared live state of the running user agent: policy discovery and cache,
per-origin status (the toolbar indicators), pending prompts, the event bus,
and the decision path the proxy and control API both use."""

from __future__ import annotations

import queue
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from urllib.parse import urlparse

import requests

from .config import AgentConfig
from .engine import Decision, DecisionCache, OverrideStore, decide_site
from .lexer import ParseError
from .policy import PrivacyPolicy, parse_policy, render_policy_english
from .repository import Repository, load_repository
from .rules import RuleSet, parse_ruleset, preset, preset_text
from .schema import DataSchema, base_schema, load_schema_extension

WELL_KNOWN_PATH = "/.well-known/privacy-policy.ppf"

_MAX_AGE_RE = re.compile(r"max-age\s*=\s*(\d+)")


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def normalize_origin(scheme: str, host: str, port: int | None) -> str:
    scheme = scheme.lower()
    host = host.lower()
    default = {"http": 80, "https": 443}.get(scheme)
    if port is None or port == default:
        return f"{scheme}://{host}"
    return f"{scheme}://{host}:{port}"


def origin_of_url(url: str) -> str:
    parsed = urlparse(url)
    return normalize_origin(parsed.scheme or "http", parsed.hostname or "", parsed.port)


@dataclass
class PolicyFetchResult:
    outcome: str  # "found" | "not-found" | "fetch-error"
    policy: PrivacyPolicy | None = None
    raw_text: str | None = None
    source: str | None = None  # "well-known" | "header"
    reason: str | None = None  # timeout | parse | network | http-<code>
    fetched_at: str = ""
    ttl: float = 86400.0


@dataclass
class SiteStatus:
    origin: str
    policy_enabled: bool = False
    cookies_seen: bool = False
    seals: list[str] = field(default_factory=list)
    last_decision: Decision | None = None
    disclosure_uri: str | None = None
    fetch_outcome: str | None = None  # found | not-found | fetch-error

    def to_dict(self) -> dict:
        return {
            "origin": self.origin,
            "policy-enabled": self.policy_enabled,
            "cookies-seen": self.cookies_seen,
            "seals": list(self.seals),
            "disclosure-uri": self.disclosure_uri,
            "fetch-outcome": self.fetch_outcome,
            "last-decision": decision_to_dict(self.last_decision) if self.last_decision else None,
        }


def decision_to_dict(d: Decision) -> dict:
    return {
        "action": d.action,
        "fired-rule": d.fired_rule,
        "ruleset": d.ruleset_name,
        "explanation": d.explanation,
        "policy-hash": d.policy_hash,
        "decided-at": d.decided_at,
    }


class EventBus:
    """Fan-out of agent events to any number of stream subscribers.

    A single publish lock keeps per-origin event order identical across
    subscribers.
    """

    def __init__(self):
        self._subscribers: list[queue.Queue] = []
        self._lock = threading.Lock()

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, kind: str, data: dict) -> None:
        with self._lock:
            for q in self._subscribers:
                q.put((kind, data))


class PendingPrompt:
    """One warn decision awaiting a human answer; resolves exactly once."""

    def __init__(self, origin: str, decision: Decision, summary: str, disclosure_uri: str | None):
        self.id = uuid.uuid4().hex
        self.origin = origin
        self.decision = decision
        self.summary = summary
        self.disclosure_uri = disclosure_uri
        self.created_at = _now()
        self.state = "pending"  # pending | resolved
        self.resolution: str | None = None  # allow | block | timed-out
        self._event = threading.Event()
        self._lock = threading.Lock()

    def resolve(self, resolution: str) -> bool:
        """Compare-and-set out of pending; False if already resolved."""
        with self._lock:
            if self.state != "pending":
                return False
            self.state = "resolved"
            self.resolution = resolution
            self._event.set()
            return True

    def wait(self, timeout: float) -> str:
        """Block until resolution or timeout; timeout resolves as timed-out."""
        self._event.wait(timeout)
        with self._lock:
            if self.state == "pending":
                self.state = "resolved"
                self.resolution = "timed-out"
                self._event.set()
            return self.resolution or "timed-out"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "origin": self.origin,
            "decision": decision_to_dict(self.decision),
            "summary": self.summary,
            "disclosure-uri": self.disclosure_uri,
            "created-at": self.created_at,
            "state": self.state,
            "resolution": self.resolution,
        }


class PromptError(Exception):
    def __init__(self, kind: str):
        self.kind = kind  # unknown-id | already-resolved
        super().__init__(kind)


class AgentState:
    """Everything the proxy and control API share."""

    def __init__(self, config: AgentConfig | None = None):
        self.config = config or AgentConfig()
        self.schema: DataSchema = base_schema()
        for path in self.config.schema_files:
            with open(path, "r", encoding="utf-8") as fh:
                self.schema = load_schema_extension(fh.read(), self.schema)

        self._ruleset_lock = threading.Lock()
        if self.config.ruleset.startswith("preset:"):
            name = self.config.ruleset.split(":", 1)[1]
            self._ruleset = preset(name)
            self._ruleset_text = preset_text(name)
        else:
            with open(self.config.ruleset, "r", encoding="utf-8") as fh:
                self._ruleset_text = fh.read()
            self._ruleset = parse_ruleset(self._ruleset_text)

        self._repo_lock = threading.Lock()
        if self.config.repository_file:
            try:
                self.repository = load_repository(self.config.repository_file, self.schema)
            except FileNotFoundError:
                self.repository = Repository()
        else:
            self.repository = Repository()

        self.overrides = OverrideStore(self.config.override_file)
        self.overrides.load()
        self.decision_cache = DecisionCache(ttl=self.config.policy_ttl)

        self._policy_cache: dict[str, tuple[PolicyFetchResult, float]] = {}
        self._policy_lock = threading.Lock()
        self.header_hints: dict[str, str] = {}

        self._status: dict[str, SiteStatus] = {}
        self._status_lock = threading.Lock()

        self.prompts: dict[str, PendingPrompt] = {}
        self._prompts_lock = threading.Lock()

        self.events = EventBus()

    # -- ruleset ---------------------------------------------------------

    @property
    def ruleset(self) -> RuleSet:
        with self._ruleset_lock:
            return self._ruleset

    @property
    def ruleset_text(self) -> str:
        with self._ruleset_lock:
            return self._ruleset_text

    def set_ruleset(self, text: str) -> RuleSet:
        rs = parse_ruleset(text)  # raises ParseError on bad input
        with self._ruleset_lock:
            self._ruleset = rs
            self._ruleset_text = text
        return rs

    # -- status ----------------------------------------------------------

    def status_for(self, origin: str) -> SiteStatus:
        with self._status_lock:
            return self._status.setdefault(origin, SiteStatus(origin=origin))

    def all_status(self) -> list[SiteStatus]:
        with self._status_lock:
            return [self._status[o] for o in sorted(self._status)]

    def note_cookies(self, origin: str) -> None:
        status = self.status_for(origin)
        if not status.cookies_seen:
            status.cookies_seen = True
            self.events.publish("status-changed", status.to_dict())

    # -- policy discovery ------------------------------------------------

    def discover_policy(self, origin: str, force: bool = False) -> PolicyFetchResult:
        """Well-known path first, then a previously observed Privacy-Policy
        response header; results cached for the response's max-age or the
        configured default TTL."""
        with self._policy_lock:
            hit = self._policy_cache.get(origin)
            if hit and not force and time.monotonic() < hit[1]:
                return hit[0]
        result = self._fetch_policy(origin)
        with self._policy_lock:
            self._policy_cache[origin] = (result, time.monotonic() + result.ttl)
        self._apply_fetch_to_status(origin, result)
        return result

    def _fetch_policy(self, origin: str) -> PolicyFetchResult:
        ttl = self.config.policy_ttl
        result = self._fetch_one(origin + WELL_KNOWN_PATH, "well-known", ttl)
        hint = self.header_hints.get(origin)
        if result.outcome == "not-found" and hint:
            result = self._fetch_one(hint, "header", ttl)
        return result

    def _fetch_one(self, url: str, source: str, default_ttl: float) -> PolicyFetchResult:
        try:
            resp = requests.get(
                url,
                timeout=self.config.fetch_timeout,
                proxies={"http": None, "https": None},
            )
        except requests.Timeout:
            return PolicyFetchResult("fetch-error", reason="timeout", fetched_at=_now(), ttl=default_ttl)
        except requests.RequestException:
            return PolicyFetchResult("fetch-error", reason="network", fetched_at=_now(), ttl=default_ttl)
        if resp.status_code == 404:
            return PolicyFetchResult("not-found", fetched_at=_now(), ttl=default_ttl)
        if resp.status_code != 200:
            return PolicyFetchResult(
                "fetch-error", reason=f"http-{resp.status_code}", fetched_at=_now(), ttl=default_ttl
            )
        ttl = default_ttl
        m = _MAX_AGE_RE.search(resp.headers.get("Cache-Control", ""))
        if m:
            ttl = float(m.group(1))
        try:
            policy = parse_policy(resp.text, self.schema)
        except ParseError:
            return PolicyFetchResult("fetch-error", reason="parse", fetched_at=_now(), ttl=ttl)
        return PolicyFetchResult(
            "found", policy=policy, raw_text=resp.text, source=source, fetched_at=_now(), ttl=ttl
        )

    def _apply_fetch_to_status(self, origin: str, result: PolicyFetchResult) -> None:
        status = self.status_for(origin)
        status.fetch_outcome = result.outcome
        status.policy_enabled = result.outcome == "found"
        if result.outcome == "found" and result.policy is not None:
            status.seals = sorted(result.policy.seals)
            status.disclosure_uri = result.policy.disclosure_uri
        self.events.publish("status-changed", status.to_dict())

    # -- decisions -------------------------------------------------------

    def decide_for_origin(self, origin: str) -> tuple[Decision, PolicyFetchResult]:
        fetch = self.discover_policy(origin)
        policy = fetch.policy if fetch.outcome == "found" else None
        decision = decide_site(
            origin, policy, self.ruleset, self.schema, self.overrides, self.decision_cache
        )
        status = self.status_for(origin)
        status.last_decision = decision
        self.events.publish("decision", {"origin": origin, **decision_to_dict(decision)})
        return decision, fetch

    # -- prompts ---------------------------------------------------------

    def create_prompt(self, origin: str, decision: Decision, fetch: PolicyFetchResult) -> PendingPrompt:
        summary = ""
        disclosure = None
        if fetch.outcome == "found" and fetch.policy is not None:
            summary = render_policy_english(fetch.policy)
            if len(summary) > 600:
                summary = summary[:600] + "..."
            disclosure = fetch.policy.disclosure_uri
        prompt = PendingPrompt(origin, decision, summary, disclosure)
        with self._prompts_lock:
            self.prompts[prompt.id] = prompt
        self.events.publish("prompt-created", prompt.to_dict())
        return prompt

    def pending_prompts(self) -> list[PendingPrompt]:
        with self._prompts_lock:
            return [p for p in self.prompts.values() if p.state == "pending"]

    def resolve_prompt(self, prompt_id: str, resolution: str, remember: str = "none") -> None:
        """First resolution wins; remember != none records an override."""
        with self._prompts_lock:
            prompt = self.prompts.get(prompt_id)
        if prompt is None:
            raise PromptError("unknown-id")
        if not prompt.resolve(resolution):
            raise PromptError("already-resolved")
        if remember != "none" and prompt.decision.policy_hash is not None:
            action = "accept" if resolution == "allow" else "block"
            self.overrides.record(prompt.origin, prompt.decision.policy_hash, action, remember)
        self.events.publish("prompt-resolved", prompt.to_dict())

    def finish_prompt_timeout(self, prompt: PendingPrompt) -> None:
        self.events.publish("prompt-resolved", prompt.to_dict())
