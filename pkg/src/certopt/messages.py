"""Messages and in-process channels between the two workers.

``UpperBound`` travels from DE to IB&C through a single best-wins slot;
``Inject`` travels from IB&C to DE through a bounded drop-oldest queue.  A
shared event carries ``Terminate``.  Senders never block.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from typing import Any, Optional

INJECT_CAPACITY = 16


@dataclass(frozen=True)
class UpperBound:
    value: float
    point: tuple


@dataclass(frozen=True)
class Inject:
    point: tuple


@dataclass(frozen=True)
class Terminate:
    result: Any = None


class UpperBoundSlot:
    """Holds the best pending upper bound; a worse post is dropped."""

    def __init__(self):
        self._lock = threading.Lock()
        self._msg: Optional[UpperBound] = None

    def post(self, msg: UpperBound) -> None:
        with self._lock:
            if self._msg is None or msg.value < self._msg.value:
                self._msg = msg

    def take(self) -> Optional[UpperBound]:
        with self._lock:
            msg, self._msg = self._msg, None
        return msg


class InjectQueue:
    """Bounded FIFO that drops its oldest entry when full."""

    def __init__(self, capacity: int = INJECT_CAPACITY):
        self._q: deque = deque(maxlen=capacity)
        self._lock = threading.Lock()

    def post(self, msg: Inject) -> None:
        with self._lock:
            self._q.append(msg)

    def take_all(self) -> list[Inject]:
        with self._lock:
            out = list(self._q)
            self._q.clear()
        return out

    def __len__(self):
        return len(self._q)


class Link:
    """The pair of directed channels plus the termination signal."""

    def __init__(self, inject_capacity: int = INJECT_CAPACITY):
        self.to_ibc = UpperBoundSlot()
        self.to_de = InjectQueue(inject_capacity)
        self._stop = threading.Event()
        self.final: Optional[Terminate] = None

    def send(self, msg) -> None:
        if isinstance(msg, UpperBound):
            self.to_ibc.post(msg)
        elif isinstance(msg, Inject):
            self.to_de.post(msg)
        elif isinstance(msg, Terminate):
            self.final = msg
            self._stop.set()
        else:
            raise TypeError(f"unknown message {msg!r}")

    def terminate(self, result=None) -> None:
        self.send(Terminate(result))

    @property
    def terminated(self) -> bool:
        return self._stop.is_set()

    def wait(self, timeout: float) -> bool:
        return self._stop.wait(timeout)
