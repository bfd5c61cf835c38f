"""Falsification of neural-network controllers through synthesized linear proxies."""
from .controllers import MlpController, ProxyProgram, embed_linear_as_mlp, load_mlp, load_proxy
from .falsification import Budget, SaParams, SubSpecLedger, ViolationRecord, run_campaign, sa_trial
from .plants import PlantSpec, load_plant, simulate
from .stl import parse_stl, robustness, split_conjunctive
from .synthesis import EsParams, es_synthesize, evaluate_alignment, refine
from .traces import BoxDomain, Trace

__version__ = "0.1.0"
