#pragma once

#include <cstdint>
#include <vector>

namespace modno {

// Training-cost bookkeeping for one operator: per-function query counts and
// the per-query cost of one forward+backward pass through the dedicated net.
struct OperatorCost {
    std::vector<std::int64_t> queries_per_function;
    double dedicated_pass_cost = 0.0;
};

struct CostLedger {
    std::vector<OperatorCost> operators;
    double shared_pass_cost = 0.0;  // per-query forward+backward cost of the shared net
    std::int64_t epochs = 1;        // multiplier; cancels in every reported ratio
    double q = 1.0;
    double c_mol = 0.0;  // filled by compute_costs
    double c_sol = 0.0;
};

// Multi-operator training cost: every query pays the dedicated-net pass, and a
// q-fraction of queries additionally pays the shared-net pass.
double cost_modno(const CostLedger& ledger, double q);

// Baseline cost of training one independent model per operator: every query
// pays both passes.
double cost_sol(const CostLedger& ledger);

// Evaluates both totals at the ledger's q and stores them in the ledger.
void compute_costs(CostLedger& ledger);

}  // namespace modno
