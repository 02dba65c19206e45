"""Run-scoped logging helpers and in-memory milestone store."""
from __future__ import annotations

import logging
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Mapping, MutableMapping


class RunLogStore:
    """Lightweight in-memory store so experiment milestones can be inspected after a run."""

    def __init__(self) -> None:
        self._records: Dict[str, List[Mapping[str, Any]]] = {}

    def append(self, run_id: str, entry: Mapping[str, Any]) -> None:
        self._records.setdefault(run_id, []).append(entry)

    def get(self, run_id: str) -> List[Mapping[str, Any]]:
        return list(self._records.get(run_id, []))

    def pop(self, run_id: str) -> List[Mapping[str, Any]]:
        return self._records.pop(run_id, [])

    def clear(self) -> None:
        self._records.clear()


run_log_store = RunLogStore()


@dataclass
class RunContext:
    """State bag that injects run identifiers into every log line of a command."""

    run_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    command: str | None = None
    digests: MutableMapping[str, str] = field(default_factory=dict)
    _store: RunLogStore = field(default=run_log_store, repr=False)

    def with_command(self, command: str | None) -> "RunContext":
        if command:
            self.command = command
        return self

    def attach_digest(self, name: str, digest: str) -> None:
        if name and digest:
            self.digests[name] = digest

    def extra(self, **fields: Any) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"run_id": self.run_id}
        if self.command:
            payload["command"] = self.command
        if self.digests:
            payload["digests"] = dict(self.digests)
        for key, value in fields.items():
            if value is not None:
                payload[key] = value
        return payload

    def log(
        self,
        logger: logging.Logger,
        level: int,
        message: str,
        *,
        exc_info: bool | BaseException | None = None,
        stack_info: bool = False,
        **fields: Any,
    ) -> None:
        extra_payload = self.extra(**fields)
        logger.log(level, message, extra=extra_payload, exc_info=exc_info, stack_info=stack_info)
        self._store.append(
            self.run_id,
            {
                "timestamp": datetime.now(timezone.utc).isoformat(timespec="milliseconds"),
                "level": logging.getLevelName(level),
                "message": message,
                "extra": extra_payload,
            },
        )

    def debug(self, logger: logging.Logger, message: str, **fields: Any) -> None:
        self.log(logger, logging.DEBUG, message, **fields)

    def info(self, logger: logging.Logger, message: str, **fields: Any) -> None:
        self.log(logger, logging.INFO, message, **fields)

    def warning(self, logger: logging.Logger, message: str, *, exc_info: bool | BaseException | None = None, **fields: Any) -> None:
        self.log(logger, logging.WARNING, message, exc_info=exc_info, **fields)

    def error(self, logger: logging.Logger, message: str, *, exc_info: bool | BaseException | None = None, **fields: Any) -> None:
        self.log(logger, logging.ERROR, message, exc_info=exc_info, **fields)

    def exception(self, logger: logging.Logger, message: str, **fields: Any) -> None:
        self.log(logger, logging.ERROR, message, exc_info=True, **fields)


def log_event(
    logger: logging.Logger,
    context: RunContext | None,
    message: str,
    *,
    level: int = logging.INFO,
    **fields: Any,
) -> None:
    """Route a milestone through the run context when present, else straight to the logger."""

    if context:
        context.log(logger, level, message, **fields)
    else:
        logger.log(level, message, extra={key: value for key, value in fields.items() if value is not None})


__all__ = ["RunContext", "RunLogStore", "log_event", "run_log_store"]
