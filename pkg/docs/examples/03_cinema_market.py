"""
A small cinema market
=====================

Three cinemas with reserves of 8, 9 and 10 compete for a booking of two
seats. Each iteration the consumer lowers its price by half a euro and
every cinema either takes the new price or stays with its last agreement.
Once the best agreement scores well enough it is confirmed and the rest
are cancelled.

The second half books through Search & Book, where the consumer first
looks up which cinemas show the film at all.
"""

from wsag_market.sim import load_scenario, oracle_best_outcome, run_scenario

scenario = load_scenario("cinema-3p-icnip")
result = run_scenario(scenario)

print(f"{scenario.name}: {result.status} after {result.iterations} iterations")
for i, price in enumerate(result.per_iteration_best, 1):
    print(f"  iteration {i:>2}: best price {price}")
print(f"winner {result.agreement.provider_id} at {result.final_price}, utility {result.utility}")
print(f"{result.provisional} provisional agreements at close, {result.cancellations} cancelled")

# %%
# How much did bargaining leave on the table? The oracle enumerates every
# price on the same 0.50 grid against every cinema's acceptance policy.

best = oracle_best_outcome(scenario)
print(f"oracle: {best.best_provider} at {best.best_bindings['price']}, utility {best.best_utility}")

# %%
# Seeds only push list prices up. The consumer still opens at 12, so the
# outcome stays put, and it never beats the oracle.

for seed in range(5):
    r = run_scenario(scenario, seed=seed)
    o = oracle_best_outcome(scenario, seed=seed)
    print(f"  seed {seed}: {r.final_price} in {r.iterations} iterations, utility {r.utility} <= {o.best_utility}")

# %%
# Search & Book. Cinema C does not show Metropolis, so only A and B are
# asked; one agreement is kept, booked and written to the store.

sb = run_scenario(load_scenario("cinema-search-and-book"))
print(f"\nsearch and book: {sb.agreement.provider_id} show {sb.agreement.bindings['show_id']}"
      f" at {sb.final_price}, {sb.cancellations} cancelled")
print("booking results:", sb.pipeline.results)
