"""WebSocket control service: one live session, human-steerable.

The simulation advances inside a single asyncio task. Command intake and
broadcast fan-out happen on the same event loop but exchange data with the
stepping task only through queues, and pending commands are applied strictly
between simulation steps, so every broadcast reflects a consistent
between-steps state.

Protocol (JSON text messages over ``/ws``): the server sends envelopes with
``type`` in {hello, state, ack, error, metrics, rewind_event}; clients send
commands like ``{"cmd": "pause"}`` (an optional ``{"type": "command", ...}``
wrapper is accepted). ``GET /snapshot-times`` lists the rewindable time
indices. A manual rewind goes through the same restoration path as automatic
failure handling.
"""
from __future__ import annotations

import asyncio
import json
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .config import ExperimentConfig, config_to_dict
from .session import TrainingSession

DEFAULT_PORT = 7341
MAX_BROADCAST_HZ = 60.0

# Parameters an operator may change mid-run. Everything else (notably gamma,
# which trace reversal depends on) is fixed for the life of the session.
TUNABLE_PARAMS = (
    "epsilon", "temperature", "alpha",
    "rewind_kind", "rewind_k", "rewind_p", "rewind_escalation",
    "steps_per_second",
)


@dataclass(eq=False)
class _Client:
    outbox: asyncio.Queue = field(default_factory=asyncio.Queue)

    def push(self, message: dict) -> None:
        self.outbox.put_nowait(message)


class ControlService:
    """Owns the session, the stepping task and the subscriber set."""

    def __init__(self, config: ExperimentConfig, out_dir: str | Path | None = None):
        self.config = config
        self.session = TrainingSession(config, seed=config.seeds[0], keep_store=True)
        self.out_path = Path(out_dir) / "runs.jsonl" if out_dir else None
        if self.out_path:
            self.out_path.parent.mkdir(parents=True, exist_ok=True)
        self.running = False
        self.steps_per_second = 50.0  # dt=0.02 -> real time
        self.seq = 0
        self.commands: asyncio.Queue = asyncio.Queue()
        self.clients: set[_Client] = set()
        self.last_rewind: dict | None = None
        self._last_state_sent = 0.0

    # -- broadcasting --------------------------------------------------------

    def state_message(self) -> dict:
        session = self.session
        state = session.state
        self.seq += 1
        return {
            "type": "state",
            "seq": self.seq,
            "time_index": state.time_index,
            "trial": session.trial,
            "state": {
                "x": state.x, "x_dot": state.x_dot,
                "theta": state.theta, "theta_dot": state.theta_dot,
            },
            "discrete_id": session.current_id,
            "q_row": session.agent.values_row(session.current_id),
            "last_reward": session.last_reward,
            "metrics": self.metrics_dict(),
            "last_rewind": self.last_rewind,
        }

    def metrics_dict(self) -> dict:
        session = self.session
        return {
            "steps_taken": session.steps_taken,
            "best_trial_steps": session.best_steps,
            "unique_states": session.unique_states(),
            "trial_count": session.trial,
            "rewind_count": session.rewind_count,
        }

    def broadcast(self, message: dict) -> None:
        for client in self.clients:
            client.push(message)

    def _broadcast_state(self, now: float, force: bool = False) -> None:
        if not force and self.steps_per_second > MAX_BROADCAST_HZ:
            if now - self._last_state_sent < 1.0 / MAX_BROADCAST_HZ:
                return  # decimated; the next allowed broadcast carries the latest state
        self._last_state_sent = now
        self.broadcast(self.state_message())

    def _log(self, entry: dict) -> None:
        if self.out_path is None:
            return
        with open(self.out_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")

    # -- command handling (always between steps) ------------------------------

    def apply_command(self, client: _Client | None, message: dict) -> None:
        cmd = message.get("cmd")
        loop_now = asyncio.get_event_loop().time()
        try:
            if cmd == "run":
                self.running = True
            elif cmd == "pause":
                self.running = False
            elif cmd == "step":
                self._step(loop_now, force_broadcast=True)
            elif cmd == "reset_trial":
                self.session.manual_reset()
                self._ack(client, cmd)
                self._broadcast_state(loop_now, force=True)
                return
            elif cmd == "rewind":
                event = self.session.manual_rewind(
                    target_time=message.get("target_time"),
                    steps_back=message.get("steps_back"),
                )
                self.last_rewind = event.log_fields()
                self._log({"type": "rewind", **event.log_fields()})
                self._ack(client, cmd)
                self.broadcast({"type": "rewind_event", **event.log_fields()})
                self._broadcast_state(loop_now, force=True)
                return
            elif cmd == "set_param":
                self._set_param(message.get("name"), message.get("value"))
            elif cmd == "set_speed":
                self._set_param("steps_per_second", message.get("steps_per_second"))
            elif cmd == "snapshots":
                self._ack(client, cmd, times=self.session.snapshot_times())
                return
            elif cmd == "graph":
                self._ack(client, cmd, graph=self.session.graph.to_json_dict())
                return
            elif cmd == "metrics":
                if client is not None:
                    client.push({"type": "metrics", **self.metrics_dict()})
                return
            else:
                raise ValueError(f"unknown command {cmd!r}")
        except (ValueError, TypeError, KeyError) as exc:
            if client is not None:
                client.push({"type": "error", "cmd": cmd, "message": str(exc)})
            return
        self._ack(client, cmd)

    def _ack(self, client: _Client | None, cmd, **extra) -> None:
        if client is not None:
            client.push({"type": "ack", "cmd": cmd, **extra})

    def _set_param(self, name, value) -> None:
        if name not in TUNABLE_PARAMS:
            raise ValueError(f"parameter {name!r} is not runtime-tunable")
        if name == "steps_per_second":
            speed = float(value)
            if not speed > 0:
                raise ValueError("steps_per_second must be positive")
            self.steps_per_second = speed
        else:
            self.session.set_param(name, value)
        self._log({"type": "param", "name": name, "value": value})

    # -- the stepping task -----------------------------------------------------

    def _step(self, now: float, force_broadcast: bool = False) -> None:
        record = self.session.step_once()
        if record.rewind_event is not None:
            self.last_rewind = record.rewind_event.log_fields()
            self._log({"type": "rewind", **self.last_rewind})
            self.broadcast({"type": "rewind_event", **self.last_rewind})
        self._broadcast_state(now, force=force_broadcast)

    async def loop(self) -> None:
        loop = asyncio.get_event_loop()
        next_due = loop.time()
        while True:
            while not self.commands.empty():
                client, message = self.commands.get_nowait()
                self.apply_command(client, message)
            now = loop.time()
            if self.running:
                if now >= next_due:
                    self._step(now)
                    next_due = max(next_due + 1.0 / self.steps_per_second,
                                   now - 0.25)  # don't hoard an unbounded backlog
                await asyncio.sleep(max(0.0, min(next_due - loop.time(), 0.01)))
            else:
                next_due = now
                await asyncio.sleep(0.005)


def create_app(
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    panel_dir: str | Path | None = None,
) -> FastAPI:
    service = ControlService(config, out_dir)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(service.loop())
        yield
        task.cancel()

    app = FastAPI(title="rewindrl control service", lifespan=lifespan)
    app.state.service = service

    @app.get("/snapshot-times")
    async def snapshot_times() -> list[int]:
        return service.session.snapshot_times()

    @app.websocket("/ws")
    async def ws(websocket: WebSocket) -> None:
        await websocket.accept()
        client = _Client()
        client.push({"type": "hello", "config": config_to_dict(config)})
        client.push(service.state_message())
        service.clients.add(client)

        async def reader() -> None:
            while True:
                raw = await websocket.receive_text()
                try:
                    message = json.loads(raw)
                    if not isinstance(message, dict):
                        raise ValueError("message must be a JSON object")
                except ValueError as exc:
                    client.push({"type": "error", "message": f"malformed message: {exc}"})
                    continue
                await service.commands.put((client, message))

        async def writer() -> None:
            while True:
                message = await client.outbox.get()
                await websocket.send_text(json.dumps(message))

        try:
            done, pending = await asyncio.wait(
                [asyncio.create_task(reader()), asyncio.create_task(writer())],
                return_when=asyncio.FIRST_EXCEPTION,
            )
            for task in pending:
                task.cancel()
            for task in done:
                exc = task.exception()
                if exc is not None and not isinstance(exc, WebSocketDisconnect):
                    raise exc
        except WebSocketDisconnect:
            pass
        finally:
            service.clients.discard(client)

    if panel_dir is not None and Path(panel_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(panel_dir), html=True), name="panel")

    return app


def serve(
    config: ExperimentConfig,
    port: int = DEFAULT_PORT,
    out_dir: str | Path | None = None,
    panel_dir: str | Path | None = None,
    host: str = "127.0.0.1",
) -> None:
    """Run the control service until interrupted."""
    import uvicorn

    app = create_app(config, out_dir=out_dir, panel_dir=panel_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
