"""Training-time novelty exchange under the one-scalar-per-step contract.

Each agent broadcasts exactly one float per frame (one frame per timestep
per environment instance); a frame can be read only once every agent has
sent. The bus counts every scalar so a run's communication budget is
auditable, and evaluation rollouts simply never touch it.
"""

from __future__ import annotations

import csv


class ProtocolError(RuntimeError):
    """Raised on duplicate sends or reads of an incomplete frame."""


class BusFrame:
    """One timestep's messages: a single scalar slot per agent."""

    __slots__ = ("key", "_values", "_bus")

    def __init__(self, key, num_agents: int, bus: "NoveltyBus" = None):
        self.key = key
        self._values = [None] * num_agents
        self._bus = bus

    def send(self, agent: int, value: float) -> None:
        if not 0 <= agent < len(self._values):
            raise ProtocolError(f"unknown agent {agent}")
        if self._values[agent] is not None:
            raise ProtocolError(f"agent {agent} already sent at frame {self.key}")
        self._values[agent] = float(value)
        if self._bus is not None:
            self._bus._on_send(self.key, agent, self._values[agent])

    @property
    def complete(self) -> bool:
        return all(v is not None for v in self._values)

    def collect(self, agent: int) -> tuple:
        """All agents' novelties for this frame, own value included."""
        if not 0 <= agent < len(self._values):
            raise ProtocolError(f"unknown agent {agent}")
        if not self.complete:
            missing = [i for i, v in enumerate(self._values) if v is None]
            raise ProtocolError(f"frame {self.key} incomplete; waiting on agents {missing}")
        return tuple(self._values)


class NoveltyBus:
    """Fully-connected, lossless, same-step delivery; budget-counted."""

    def __init__(self, num_agents: int, trace_path=None):
        self.num_agents = int(num_agents)
        self.messages_sent = 0
        self._trace_file = None
        self._trace = None
        if trace_path is not None:
            self._trace_file = open(trace_path, "w", newline="")
            self._trace = csv.writer(self._trace_file)
            self._trace.writerow(["t", "agent", "u"])

    def open_frame(self, key) -> BusFrame:
        return BusFrame(key, self.num_agents, bus=self)

    def _on_send(self, key, agent, value) -> None:
        self.messages_sent += 1
        if self._trace is not None:
            t = key[0] if isinstance(key, tuple) else key
            self._trace.writerow([t, agent, repr(value)])

    def close(self) -> None:
        if self._trace_file is not None:
            self._trace_file.close()
            self._trace_file = None
            self._trace = None
