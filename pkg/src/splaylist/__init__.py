"""splaylist: self-adjusting skip lists whose heights track hit frequency."""

from .core import SplayList, MAX_LEVEL
from .policy import RebalancePolicy
from .skiplist import SkipList
from .concurrent import ConcurrentSplayList

__all__ = ["SplayList", "SkipList", "ConcurrentSplayList",
           "RebalancePolicy", "MAX_LEVEL"]
__version__ = "0.1.0"
