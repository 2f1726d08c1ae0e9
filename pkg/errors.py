"""Exception hierarchy. main.py maps these onto process exit codes."""
from typing import Optional


class JoinConvError(Exception):
    """❗ Base error"""
    exit_code = 2


class InvalidInputError(JoinConvError):
    """📄 Malformed instance, result or CLI input"""
    exit_code = 1


class ExponentBudgetExceeded(InvalidInputError):
    """📏 Embedding would need more exponents than the configured budget"""

    def __init__(self, required: int, budget: int):
        super().__init__(f"embedding needs exponents up to {required}, budget is {budget}")
        self.required = required
        self.budget = budget


class ConsistencyError(JoinConvError):
    """🧨 Internal consistency failure"""
    exit_code = 2


class CorruptDpTableError(ConsistencyError):
    """🧩 No split reproduces a DP entry"""


class ArithmeticOverflowError(ConsistencyError):
    """💥 Checked ring arithmetic left the 64-bit range"""


class OracleDisagreementError(ConsistencyError):
    """⚖️ Two algorithms disagree on the optimal value"""

    def __init__(self, message: str, seed: Optional[int] = None,
                 n: Optional[int] = None, rep: Optional[int] = None):
        super().__init__(f"{message} (reproduce with seed={seed}, n={n}, rep={rep})")
        self.seed = seed
        self.n = n
        self.rep = rep
