"""Pricing and hedging under funding, repo and collateral conventions."""

from ._fundhedge import (
    ConfigError,
    Error,
    arbitrage_gate,
    load_config,
    parse_config,
    price,
    run,
)

__all__ = [
    "ConfigError",
    "Error",
    "arbitrage_gate",
    "load_config",
    "parse_config",
    "price",
    "run",
]
