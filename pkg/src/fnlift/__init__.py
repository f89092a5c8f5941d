"""fnlift: extract-function refactoring for Rust source, with compiler-guided
lifetime repair and bounded behavioural equivalence checking.

The package is organized by pipeline stage:

    source    - lossless, error-tolerant parsing; selections; std catalog
    analysis  - captured variables, parameter modes, control-flow profile, flags
    extract   - synthesis of the new function and the call-site edit script
    repair    - rustc-as-oracle lifetime repair and elision
    equiv     - functional IR, interpreter, bounded equivalence verdicts
    daemon    - framed JSON-RPC stdio server
    cli       - one-shot command line interface
    bench     - marker-corpus harness producing CSV / markdown results
"""

__version__ = "0.1.0"
