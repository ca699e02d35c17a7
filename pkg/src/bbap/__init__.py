"""Exact branch-and-price for assigning arriving flights to baggage belts."""
from .bnp import BnpResult, solve
from .model import (Assignment, Belt, DurationSet, Flight, Instance, Solution, check_solution,
                    finish, validate_instance)
from .oracle import OracleLimits, oracle_solve
from .profits import GenConfig, ProfitParams, generate

__all__ = [
    "Assignment", "Belt", "BnpResult", "DurationSet", "Flight", "GenConfig", "Instance",
    "OracleLimits", "ProfitParams", "Solution", "check_solution", "finish", "generate",
    "oracle_solve", "solve", "validate_instance",
]
