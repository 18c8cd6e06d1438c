"""Drop -> split -> scale -> select -> balance, all fitted on training rows."""
from .balancing import BalanceResult, balance
from .scaling import ScalerParams, apply_scaler, fit_scaler
from .selection import SelectionResult, select_features
from .split import DataWarning, SplitPlan, drop, split

__all__ = ["BalanceResult", "balance", "ScalerParams", "apply_scaler", "fit_scaler",
           "SelectionResult", "select_features", "DataWarning", "SplitPlan", "drop", "split"]
