"""Guards-and-Prisoners domain pack.

Configuration semantics, the `safe` predicate, the five primitive boat
operations, and an independent breadth-first solver used as the oracle
against which mechanism-executed plans are verified.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

DEFAULT_CAPACITY = 2

OPERATIONS = ("EmbarkGuard", "EmbarkPrisoner", "Cross",
              "DisembarkGuard", "DisembarkPrisoner")


class GppError(Exception):
    pass


class InapplicableOperation(GppError):
    pass


@dataclass(frozen=True)
class BankCount:
    guardCount: int
    prisonerCount: int

    def to_json(self) -> Dict[str, int]:
        return {"guardCount": self.guardCount,
                "prisonerCount": self.prisonerCount}


@dataclass(frozen=True)
class GppConfig:
    leftBank: BankCount
    rightBank: BankCount
    boatSide: str  # "left" | "right"
    boatLoad: BankCount = BankCount(0, 0)
    capacity: int = DEFAULT_CAPACITY

    def to_json(self) -> Dict[str, object]:
        return {"leftBank": self.leftBank.to_json(),
                "rightBank": self.rightBank.to_json(),
                "boatSide": self.boatSide,
                "boatLoad": self.boatLoad.to_json(),
                "capacity": self.capacity}


def make_config(left: Tuple[int, int], right: Tuple[int, int],
                boat_side: str = "right",
                capacity: int = DEFAULT_CAPACITY) -> GppConfig:
    return GppConfig(BankCount(*left), BankCount(*right), boat_side,
                     BankCount(0, 0), capacity)


def config_from_json(raw: Dict[str, object]) -> GppConfig:
    """Inverse of GppConfig.to_json; missing boatLoad/capacity default."""
    def bank(key: str, default=(0, 0)) -> BankCount:
        value = raw.get(key)
        if value is None:
            return BankCount(*default)
        return BankCount(int(value["guardCount"]),
                         int(value["prisonerCount"]))

    return GppConfig(bank("leftBank"), bank("rightBank"),
                     str(raw.get("boatSide", "right")),
                     bank("boatLoad"),
                     int(raw.get("capacity", DEFAULT_CAPACITY)))


def canonical_initial(guards: int = 3, prisoners: int = 3,
                      capacity: int = DEFAULT_CAPACITY) -> GppConfig:
    """Everyone starts on the right bank; the target is the left bank."""
    return make_config((0, 0), (guards, prisoners), "right", capacity)


def safe(config: GppConfig) -> bool:
    """A bank is safe when it has no guards or at least as many guards as
    prisoners.  Docked boat occupants count with the boat-side bank."""
    lg, lp = config.leftBank.guardCount, config.leftBank.prisonerCount
    rg, rp = config.rightBank.guardCount, config.rightBank.prisonerCount
    if config.boatSide == "left":
        lg += config.boatLoad.guardCount
        lp += config.boatLoad.prisonerCount
    else:
        rg += config.boatLoad.guardCount
        rp += config.boatLoad.prisonerCount
    return (lg == 0 or lg >= lp) and (rg == 0 or rg >= rp)


def _bank(config: GppConfig) -> BankCount:
    return config.leftBank if config.boatSide == "left" else config.rightBank

def _with_bank(config: GppConfig, bank: BankCount) -> GppConfig:
    if config.boatSide == "left":
        return replace(config, leftBank=bank)
    return replace(config, rightBank=bank)


def apply_operation(op: str, config: GppConfig) -> GppConfig:
    """Apply one primitive boat operation, or raise InapplicableOperation."""
    bank, load = _bank(config), config.boatLoad
    if op == "EmbarkGuard":
        if bank.guardCount < 1:
            raise InapplicableOperation("no guard on the boat-side bank")
        if load.guardCount + load.prisonerCount >= config.capacity:
            raise InapplicableOperation("boat is full")
        cfg = _with_bank(config, replace(bank, guardCount=bank.guardCount - 1))
        return replace(cfg, boatLoad=replace(load,
                                             guardCount=load.guardCount + 1))
    if op == "EmbarkPrisoner":
        if bank.prisonerCount < 1:
            raise InapplicableOperation("no prisoner on the boat-side bank")
        if load.guardCount + load.prisonerCount >= config.capacity:
            raise InapplicableOperation("boat is full")
        cfg = _with_bank(config,
                         replace(bank, prisonerCount=bank.prisonerCount - 1))
        return replace(cfg, boatLoad=replace(
            load, prisonerCount=load.prisonerCount + 1))
    if op == "Cross":
        if load.guardCount + load.prisonerCount < 1:
            raise InapplicableOperation("boat never crosses empty")
        side = "left" if config.boatSide == "right" else "right"
        return replace(config, boatSide=side)
    if op == "DisembarkGuard":
        if load.guardCount < 1:
            raise InapplicableOperation("no guard aboard")
        cfg = _with_bank(config, replace(bank, guardCount=bank.guardCount + 1))
        return replace(cfg, boatLoad=replace(load,
                                             guardCount=load.guardCount - 1))
    if op == "DisembarkPrisoner":
        if load.prisonerCount < 1:
            raise InapplicableOperation("no prisoner aboard")
        cfg = _with_bank(config,
                         replace(bank, prisonerCount=bank.prisonerCount + 1))
        return replace(cfg, boatLoad=replace(
            load, prisonerCount=load.prisonerCount - 1))
    raise GppError(f"unknown operation {op!r}")


# --- Oracle: breadth-first search over whole crossings ----------------------

@dataclass(frozen=True)
class GppMove:
    guards: int
    prisoners: int
    direction: str  # "toLeft" | "toRight"

    def to_json(self) -> Dict[str, object]:
        return {"guards": self.guards, "prisoners": self.prisoners,
                "direction": self.direction}


def apply_move(config: GppConfig, move: GppMove) -> GppConfig:
    """One whole crossing: embark, cross, disembark everyone."""
    expect_side = "right" if move.direction == "toLeft" else "left"
    if config.boatSide != expect_side:
        raise InapplicableOperation(
            f"boat is on the {config.boatSide} bank, cannot go "
            f"{move.direction}")
    cfg = config
    for _ in range(move.guards):
        cfg = apply_operation("EmbarkGuard", cfg)
    for _ in range(move.prisoners):
        cfg = apply_operation("EmbarkPrisoner", cfg)
    cfg = apply_operation("Cross", cfg)
    for _ in range(move.guards):
        cfg = apply_operation("DisembarkGuard", cfg)
    for _ in range(move.prisoners):
        cfg = apply_operation("DisembarkPrisoner", cfg)
    return cfg


def _candidate_moves(config: GppConfig) -> List[GppMove]:
    # deterministic tie-breaking: guards desc, prisoners desc, direction
    direction = "toLeft" if config.boatSide == "right" else "toRight"
    bank = _bank(config)
    moves = []
    for g in range(min(bank.guardCount, config.capacity), -1, -1):
        for p in range(min(bank.prisonerCount, config.capacity - g), -1, -1):
            if g + p >= 1:
                moves.append(GppMove(g, p, direction))
    return moves


def is_solved(config: GppConfig) -> bool:
    return (config.rightBank == BankCount(0, 0)
            and config.boatLoad == BankCount(0, 0))


def gpp_oracle_solve(initial: GppConfig,
                     capacity: Optional[int] = None
                     ) -> Optional[List[GppMove]]:
    """Shortest safe crossing sequence moving everyone to the left bank,
    or None when unsolvable.  BFS over safe configurations only.  The
    boat capacity comes from the configuration unless overridden."""
    start = initial if capacity is None \
        else replace(initial, capacity=capacity)
    if not safe(start):
        return None
    if is_solved(start):
        return []
    seen = {start}
    queue = deque([(start, [])])
    while queue:
        config, path = queue.popleft()
        for move in _candidate_moves(config):
            try:
                nxt = apply_move(config, move)
            except InapplicableOperation:
                continue
            if not safe(nxt) or nxt in seen:
                continue
            nxt_path = path + [move]
            if is_solved(nxt):
                return nxt_path
            seen.add(nxt)
            queue.append((nxt, nxt_path))
    return None


def verify_plan(initial: GppConfig,
                moves: Sequence[GppMove]) -> bool:
    """Replay a plan: every intermediate configuration must be safe and the
    final configuration solved."""
    cfg = initial
    if not safe(cfg):
        return False
    for move in moves:
        try:
            cfg = apply_move(cfg, move)
        except InapplicableOperation:
            return False
        if not safe(cfg):
            return False
    return is_solved(cfg)


def plan_from_operations(initial: GppConfig,
                         ops: Sequence[str]) -> List[GppMove]:
    """Recover whole-crossing moves from a primitive operation sequence:
    each Cross emits the current boat load as one move."""
    cfg = initial
    plan: List[GppMove] = []
    for op in ops:
        if op == "Cross":
            direction = "toLeft" if cfg.boatSide == "right" else "toRight"
            plan.append(GppMove(cfg.boatLoad.guardCount,
                                cfg.boatLoad.prisonerCount, direction))
        cfg = apply_operation(op, cfg)
    return plan
