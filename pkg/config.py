import os
import logging
from typing import List
from dataclasses import dataclass, field
from dotenv import load_dotenv

# load .env before reading any setting
load_dotenv()


def _env_flag(name: str, default: str = 'false') -> bool:
    return os.getenv(name, default).strip().lower() in ('1', 'true', 'yes', 'on')


def _log_handlers() -> List[logging.Handler]:
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    log_file = os.getenv('JOINCONV_LOG_FILE', 'joinconv.log')
    if log_file:
        handlers.insert(0, logging.FileHandler(log_file, encoding='utf-8'))
    return handlers


# logging setup
logging.basicConfig(
    level=getattr(logging, os.getenv('JOINCONV_LOG_LEVEL', 'INFO').upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=_log_handlers()
)

logger = logging.getLogger(__name__)


@dataclass
class Config:
    """⚙️ Project settings"""

    # instance limits
    MAX_RELATIONS: int = field(default_factory=lambda: int(os.getenv('JOINCONV_MAX_RELATIONS', '30')))
    MAX_CARDINALITY: int = field(default_factory=lambda: int(os.getenv('JOINCONV_MAX_CARDINALITY', '100000000')))

    # embedding (DPconv[out])
    EXPONENT_BUDGET: int = field(default_factory=lambda: int(os.getenv('JOINCONV_EXPONENT_BUDGET', '65536')))

    # layered DP
    SMALL_LAYER_FAST_PATH: bool = field(default_factory=lambda: _env_flag('JOINCONV_SMALL_LAYER_FAST_PATH'))
    SMALL_LAYER_LIMIT: int = field(default_factory=lambda: int(os.getenv('JOINCONV_SMALL_LAYER_LIMIT', '6')))

    # vectorized split enumeration, elements per batch
    SPLIT_BATCH: int = field(default_factory=lambda: int(os.getenv('JOINCONV_SPLIT_BATCH', '4194304')))

    # paths
    RESULTS_PATH: str = field(default_factory=lambda: os.getenv('JOINCONV_RESULTS_PATH', 'results'))

    # algorithm names accepted by the CLI
    SUPPORTED_ALGORITHMS: List[str] = field(default_factory=lambda: [
        'dpsub-out', 'dpsub-max', 'dpsub-smj', 'dpconv-max', 'dpconv-out', 'ccap-naive', 'ccap-fast'
    ])

    def validate(self) -> bool:
        """🔍 Validate settings"""
        problems = []
        if not 2 <= self.MAX_RELATIONS <= 30:
            problems.append(f"MAX_RELATIONS={self.MAX_RELATIONS} outside [2, 30]")
        if self.EXPONENT_BUDGET <= 0:
            problems.append(f"EXPONENT_BUDGET={self.EXPONENT_BUDGET} must be positive")
        if self.SPLIT_BATCH <= 0:
            problems.append(f"SPLIT_BATCH={self.SPLIT_BATCH} must be positive")
        if self.MAX_CARDINALITY < 1:
            problems.append(f"MAX_CARDINALITY={self.MAX_CARDINALITY} must be at least 1")
        if self.SMALL_LAYER_LIMIT < 2:
            problems.append(f"SMALL_LAYER_LIMIT={self.SMALL_LAYER_LIMIT} must be at least 2")

        if problems:
            logger.error(f"❌ Invalid settings: {'; '.join(problems)}")
            return False

        logger.debug("✅ Settings are valid")
        return True

    def create_directories(self):
        """📁 Create output directories"""
        os.makedirs(self.RESULTS_PATH, exist_ok=True)
        logger.debug(f"📁 Directory ready: {self.RESULTS_PATH}")


# global instance
config = Config()
