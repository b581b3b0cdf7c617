from enum import Enum


class ConventionEnum(str, Enum):
    strict = 'strict'
    paper_corollary = 'paper_corollary'


class ExperimentKindEnum(str, Enum):
    validate = 'validate'
    estimate = 'estimate'
    sweep = 'sweep'
    walkseries = 'walkseries'
    renewal = 'renewal'
    identities = 'identities'
    oracle = 'oracle'


class WalkKindEnum(str, Enum):
    prob_min_nonneg = 'prob_min_nonneg'
    exp_neg_min = 'exp_neg_min'
    exp_pos_max = 'exp_pos_max'
    tilted_tau = 'tilted_tau'
    guivarch = 'guivarch'
    psi = 'psi'
    t_of_x = 't_of_x'
    bpre_survival = 'bpre_survival'


class WindowEnum(str, Enum):
    head = 'head'
    k1 = 'k1'
    left_near = 'left_near'
    right_near = 'right_near'
    k2 = 'k2'
    k1_k2 = 'k1_k2'
    full = 'full'


class IntegrandEnum(str, Enum):
    walk = 'walk'
    clan = 'clan'


class ConditionEnum(str, Enum):
    min_above = 'min_above'
    max_below = 'max_below'
    tau_at = 'tau_at'


class FunctionalEnum(str, Enum):
    one = 'one'
    exp_neg_final = 'exp_neg_final'
    inv_one_plus_sum = 'inv_one_plus_sum'


class EstimatorEnum(str, Enum):
    direct = 'direct'
    reversed = 'reversed'
    both = 'both'


class RenewalSideEnum(str, Enum):
    U = 'U'
    V = 'V'


class OutputFormatEnum(str, Enum):
    csv = 'csv'
    json = 'json'
