"""Parameter and MAC accounting for the three model kinds.

The convention (cv-count-1): a complex weight counts once, a complex
multiply-accumulate counts once, activations cost one op per element, bias
adds and flatten moves one each; convolutions carry no bias, the head does.

Run: python3 demos/05_model_costs.py
"""

from fccnn.models import build_baseline, build_fc_cnn, format_cost_table

for classes in (10, 100):
    print(format_cost_table(build_fc_cnn(classes).spec))
    print()

print(format_cost_table(build_baseline("real-cnn", 100).spec))
print()
print(format_cost_table(build_baseline("dcn", 100, dcn_activation="cardioid").spec))
