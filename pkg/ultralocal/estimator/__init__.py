from ultralocal.estimator.filter import (
    FilterRealization,
    IdentityViolation,
    build_filter,
    extract_fault,
    filter_rhs,
    matched_filter_state,
)
from ultralocal.estimator.gains import IllConditioned, recover_gains
from ultralocal.estimator.records import (
    DesignMismatch,
    DesignRecord,
    certificate_matrices,
    filter_from_design,
    load_design,
    make_design_record,
    nan_to_none,
    save_design,
)
