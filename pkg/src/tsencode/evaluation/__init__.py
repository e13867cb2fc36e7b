from .metrics import auroc, odds_ratio, odds_ratio_from_table
from .mi import estimate_mi, ksg_mi_raw, reduce_series

__all__ = ["auroc", "odds_ratio", "odds_ratio_from_table", "estimate_mi", "ksg_mi_raw", "reduce_series"]
