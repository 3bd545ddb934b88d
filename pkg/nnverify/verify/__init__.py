from .verify import (
    abstract_box,
    abstract_l2_ball,
    abstract_linf_ball,
    abstract_synonyms,
    Abstraction,
    analyze,
    check_class,
    Domains,
    domain_of,
    eps_sweep,
    ExitCodes,
    Methods,
    Proven,
    Refuted,
    run_verification,
    Solvers,
    Unknown,
    Verdict,
    verify,
    verify_many,
    verify_reluplex,
    verify_robustness,
    verify_smt
)
