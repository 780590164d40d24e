from src.simulator.corruption import confusion_table, jitter_mask, mask_iou, simulate_instances, simulate_semantic
from src.simulator.pipeline import SimulatedSample, simulate_sample
from src.simulator.scene import GroundTruthInstance, Scene, check_scene_spec, generate_scene
from src.simulator.specs import CorruptionSpec, SceneSpec, load_corruption_spec, load_scene_spec
