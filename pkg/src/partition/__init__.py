from .plan import PartitionPlan, corners_fit, plan_partition, separator_size
from .blocks import PartitionBlock, corner_block, extract_block, lower_corner_block
from .permute import RowPermutation, permute_corner

__all__ = [
    "PartitionBlock",
    "PartitionPlan",
    "RowPermutation",
    "corners_fit",
    "corner_block",
    "extract_block",
    "lower_corner_block",
    "permute_corner",
    "plan_partition",
    "separator_size",
]
