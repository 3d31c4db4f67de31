"""Call-auction matching: maximum-volume and linear-time uniform-price matching."""

from .engine import (
    assign_uniform_price,
    make_fair,
    match_greedy,
    max_fair_matching,
    maximum_matching,
    um_star,
    uniform_ask,
    uniform_bid,
    uniform_star,
)
from .orders import (
    NEG_INF,
    POS_INF,
    Matching,
    Order,
    OrderBook,
    Side,
    Transaction,
    ask,
    bid,
    more_competitive,
    pad_with_dummy,
    qty_traded,
    range_of,
    split,
    strip_dummy,
    vol,
)
from .selection import select_kth, select_q, split_q
from .verification import (
    certified_upper_bound,
    check_fair,
    check_uniform,
    check_valid,
    demand_supply_bound,
    demand_supply_bounds,
    element_distinctness,
    oracle_max_volume,
    oracle_uniform_volume,
)

__version__ = "0.1.0"
