"""Small-signal stability lab bindings."""

from ._core import (  # noqa: F401
    LABELS,
    Error,
    Model,
    avr_closed_loop,
    avr_poles,
    avr_step,
    bode_margins,
    classify,
    count_combinations,
    damping_ratio,
    eigenvalues,
    generate_dataset,
    mc_estimate,
    normalize,
    order_weights,
    poisson_pmf,
    required_samples,
    sample_contingencies,
    system_matrix,
    total_scenarios,
    train,
    two_bus_voltage,
)
