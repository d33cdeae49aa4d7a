"""
Training the preset network on synthetic videos
===============================================

Desk-scale version of the full recipe: 64 ten-second training clips, the
preset cell at 8 channels, 15 epochs of the mixed time/frequency loss, then
video-level evaluation on 16 held-out thirty-second videos (three 10 s clips
each). Takes a few minutes on one CPU core.
"""

import tempfile

from autohr.harness.config import ExperimentConfig
from autohr.harness.evaluate import evaluate
from autohr.harness.train import train
from autohr.synth import SynthParams, gen_dataset

tpl = SynthParams(height=16, width=16, skin_region=(3, 3, 10, 10), num_frames=300)
train_set = gen_dataset(64, (50, 150), subjects=16, seed=1, template=tpl).records
test_set = gen_dataset(16, (50, 150), subjects=4, seed=2,
                       template=SynthParams(**{**tpl.__dict__, "num_frames": 900})).records

out = tempfile.mkdtemp(prefix="autohr_")
config = ExperimentConfig(out=out, initial_channels=8, genotype="autohr_v1", epochs=15)
result = train(config, train_set)
for row in result.log:
    print(f"epoch {row['epoch']:2d}  L_time {row['L_time']:.3f}  L_fre {row['L_fre']:.3f}")

report = evaluate(result.net, test_set, clip_seconds=10.0)
for row in report.rows:
    print(f"{row['id']}  gt {row['gt_hr']:6.1f}  pred {row['pred_hr']:6.1f}")
m = report.metrics
print(f"MAE {m.mae:.2f}  RMSE {m.rmse:.2f}  SD {m.sd:.2f}  r {m.pearson_r:.3f}")
print("checkpoints and log in", out)
