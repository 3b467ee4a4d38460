#include "modno/cost.hpp"

#include "modno/errors.hpp"

namespace modno {
namespace {

void check_ledger(const CostLedger& ledger, double q) {
    if (q < 0.0 || q > 1.0) throw ConfigError("cost: q must lie in [0, 1]");
    if (ledger.shared_pass_cost < 0.0) throw ConfigError("cost: shared pass cost must be >= 0");
    if (ledger.epochs < 0) throw ConfigError("cost: epoch count must be >= 0");
    for (const auto& op : ledger.operators) {
        if (op.dedicated_pass_cost < 0.0) throw ConfigError("cost: dedicated pass cost must be >= 0");
        for (std::int64_t n : op.queries_per_function)
            if (n < 0) throw ConfigError("cost: query counts must be >= 0");
    }
}

double total_queries(const OperatorCost& op) {
    double sum = 0.0;
    for (std::int64_t n : op.queries_per_function) sum += static_cast<double>(n);
    return sum;
}

}  // namespace

double cost_modno(const CostLedger& ledger, double q) {
    check_ledger(ledger, q);
    double total = 0.0;
    for (const auto& op : ledger.operators) {
        double n_q = total_queries(op);
        total += n_q * op.dedicated_pass_cost + q * n_q * ledger.shared_pass_cost;
    }
    return total * static_cast<double>(ledger.epochs);
}

double cost_sol(const CostLedger& ledger) {
    check_ledger(ledger, 1.0);
    double total = 0.0;
    for (const auto& op : ledger.operators)
        total += total_queries(op) * (op.dedicated_pass_cost + ledger.shared_pass_cost);
    return total * static_cast<double>(ledger.epochs);
}

void compute_costs(CostLedger& ledger) {
    ledger.c_mol = cost_modno(ledger, ledger.q);
    ledger.c_sol = cost_sol(ledger);
}

}  // namespace modno
