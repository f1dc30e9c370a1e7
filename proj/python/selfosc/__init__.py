"""Python access to the selfosc transport coefficients, dynamics and presets."""

from ._selfosc import (
    Bath,
    Coefficients,
    ConfigError,
    DomainError,
    Error,
    NumericalError,
    Result,
    Statistics,
    System,
    asymptotic_occupation,
    coefficients,
    equilibrium_occupation,
    evolve,
    markovian_asymptote,
    parse_config,
    roots,
    run_scenario,
    run_validate,
    scenario_names,
)

__all__ = [
    "Bath",
    "Coefficients",
    "ConfigError",
    "DomainError",
    "Error",
    "NumericalError",
    "Result",
    "Statistics",
    "System",
    "asymptotic_occupation",
    "coefficients",
    "equilibrium_occupation",
    "evolve",
    "markovian_asymptote",
    "parse_config",
    "roots",
    "run_scenario",
    "run_validate",
    "scenario_names",
]
