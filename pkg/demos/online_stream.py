# %% [markdown]
# # Online tuning on an instance stream
#
# Recommendation and knowledge encoding coincide: every arrival is solved with
# the current recommendation and the result updates the model.

# %%
from __future__ import annotations

import numpy as np

from acpf.fixtures import random_instances
from acpf.kep import Budget, run_online
from acpf.scenario import scenario_from_dict, synthetic_scenario_dict

scenario = scenario_from_dict(synthetic_scenario_dict("quadratic", 30, 200))
stream = random_instances("quadratic", 200, 3, prefix="arr")

# %%
for variant in ("reactive", "surrogate_online"):
    res = run_online(scenario, stream, variant, Budget(max_evaluations=200), 3)
    perf = np.array([s.performance for s in res.trace])
    print(f"{variant:17s} first 100: {perf[:100].mean():.3f}  last 100: {perf[100:].mean():.3f}")

# %% [markdown]
# The reactive variant keeps one running-mean winner, so it behaves like a
# per-problem tuner. The online surrogate learns the instance dependence and
# improves over the stream.
