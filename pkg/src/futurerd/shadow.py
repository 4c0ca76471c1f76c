"""Access-history shadow memory.

Per 4-byte word we keep the last writer strand and the list of reader strands
since that write. The table is two-level and direct-mapped: address bits
[63:22] select a lazily allocated leaf, bits [21:2] select the word's cell
within it. Race checks go through a caller-supplied ``precedes`` callback so
the table stays independent of the reachability algorithm in use.
"""

from __future__ import annotations

from dataclasses import dataclass

WRITE_READ = "write-read"
READ_WRITE = "read-write"
WRITE_WRITE = "write-write"

_LEAF_BITS = 20
_LEAF_SIZE = 1 << _LEAF_BITS
_LEAF_MASK = _LEAF_SIZE - 1


@dataclass(frozen=True)
class RaceReport:
    addr: int  # byte address of the 4-byte word
    kind: str
    prior: int
    current: int

    def key(self) -> tuple[int, str, int, int]:
        return (self.addr, self.kind, self.prior, self.current)


class _Cell:
    __slots__ = ("last_writer", "readers")

    def __init__(self):
        self.last_writer = None
        self.readers = []


class ShadowTable:
    def __init__(self) -> None:
        self._top: dict[int, list] = {}
        self.cells_touched = 0

    def _cell(self, addr: int) -> _Cell:
        word = addr >> 2
        leaf = self._top.get(word >> _LEAF_BITS)
        if leaf is None:
            leaf = [None] * _LEAF_SIZE
            self._top[word >> _LEAF_BITS] = leaf
        cell = leaf[word & _LEAF_MASK]
        if cell is None:
            cell = _Cell()
            leaf[word & _LEAF_MASK] = cell
            self.cells_touched += 1
        return cell

    def on_read(self, addr: int, strand: int, precedes) -> RaceReport | None:
        """Record a read; report a race against an unordered last writer."""
        cell = self._cell(addr)
        report = None
        w = cell.last_writer
        if w is not None and w != strand and not precedes(w):
            report = RaceReport(addr & ~3, WRITE_READ, w, strand)
        readers = cell.readers
        if not readers or readers[-1] != strand:
            readers.append(strand)
        return report

    def on_write(self, addr: int, strand: int, precedes) -> list[RaceReport]:
        """Record a write; report races against unordered readers and writer.

        The reader list is emptied and the last writer replaced whether or
        not races were found.
        """
        cell = self._cell(addr)
        word = addr & ~3
        reports = []
        for r in cell.readers:
            if r != strand and not precedes(r):
                reports.append(RaceReport(word, READ_WRITE, r, strand))
        w = cell.last_writer
        if w is not None and w != strand and not precedes(w):
            reports.append(RaceReport(word, WRITE_WRITE, w, strand))
        cell.readers = []
        cell.last_writer = strand
        return reports
