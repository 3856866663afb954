"""Desk-scale hybrid fuzzing laboratory over a miniature IR."""
from .ir import Program, parse_program, IRSyntaxError, ValidationError
from .labels import place_labels, LabelSet
from .interp import run_concrete, ExecTrace
from .trim import trim_labels
from .icfg import build_inter_cfg, compute_reach
from .coordinator import Campaign, CampaignConfig, run_campaign
from .benchgen import BenchSpec, generate

__all__ = ["Program", "parse_program", "IRSyntaxError", "ValidationError", "place_labels",
           "LabelSet", "run_concrete", "ExecTrace", "trim_labels", "build_inter_cfg", "compute_reach",
           "Campaign", "CampaignConfig", "run_campaign", "BenchSpec", "generate"]
