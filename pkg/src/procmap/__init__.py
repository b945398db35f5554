"""Bounded-memory discovery of directly-follows graphs from event streams."""
from .errors import (BudgetViolation, DanglingEndpoint, EmptyMap, EmptyStore, MalformedEvent,
                     NotFound, ParseError, ProcmapError, UnknownTechnique, ZeroTotalFrequency)
from .evaluate import EvalReport, accuracy, evaluate, memory_words, offline_dfg
from .events import Event
from .graph import (ArcResult, ElementKind, PolicyKind, ProcessMap, Snapshot, TouchResult,
                    lossless_budget, lossless_budget_directed)
from .ingest import Order, SyntheticModel, generate, read_events, replay
from .lcb import LossyCountingBudget
from .miner import MinerConfig, RunningCaseStore, StreamMiner, UpdateReport
from .policies import AgingState, Victim, evict_once, score, select_victim

__version__ = "0.1.0"
