import logging

from gaussprg.services.logging import RunContext, log_event, run_log_store


def setup_function(_) -> None:
    run_log_store.clear()


def test_run_context_records_milestones() -> None:
    context = RunContext(command="gen")
    context.attach_digest("seed", "abc123")
    context.info(logging.getLogger(__name__), "synthetic milestone", event="test.event", skipped=None)

    logs = run_log_store.get(context.run_id)

    assert len(logs) == 1
    assert logs[0]["message"] == "synthetic milestone"
    assert logs[0]["level"] == "INFO"
    assert logs[0]["extra"] == {
        "run_id": context.run_id,
        "command": "gen",
        "digests": {"seed": "abc123"},
        "event": "test.event",
    }


def test_log_event_without_context_goes_to_logger(caplog) -> None:
    with caplog.at_level(logging.INFO):
        log_event(logging.getLogger("gaussprg.test"), None, "plain milestone", event="test.plain", empty=None)

    record = caplog.records[-1]
    assert record.getMessage() == "plain milestone"
    assert record.event == "test.plain"
    assert not hasattr(record, "empty")


def test_runs_are_kept_apart() -> None:
    first, second = RunContext(), RunContext()
    first.warning(logging.getLogger(__name__), "first")

    assert run_log_store.get(second.run_id) == []
    assert run_log_store.get(first.run_id)[0]["level"] == "WARNING"


def test_pop_drains_a_run() -> None:
    context = RunContext()
    context.info(logging.getLogger(__name__), "drained")

    assert [entry["message"] for entry in run_log_store.pop(context.run_id)] == ["drained"]
    assert run_log_store.get(context.run_id) == []
    assert run_log_store.pop(context.run_id) == []
