"""
Searching a cell
================

A short differentiable search on synthetic clips. After the warm-up epoch
the operation logits move; the trace shows the mean edge-softmax entropy
falling from ln 9, and the strongest operations are kept as the cell.
"""

from autohr.nas.genotype import genotype_to_text
from autohr.nas.search import SearchConfig, search
from autohr.synth import SynthParams, gen_dataset

data = gen_dataset(32, (50, 150), subjects=8, seed=7,
                   template=SynthParams(height=16, width=16, skin_region=(3, 3, 10, 10),
                                        num_frames=160)).records

config = SearchConfig(epochs=6, warmup_epochs=1, clip_length=64, initial_channels=4,
                      arch_lr=3e-3)
result = search(data, config)
for row in result.trace:
    print(row)
print(genotype_to_text(result.cells))
