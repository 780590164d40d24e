from dataclasses import dataclass

from src.core.models import InstanceSegment, ProbVolume
from src.simulator.corruption import simulate_instances, simulate_semantic
from src.simulator.scene import Scene, generate_scene
from src.simulator.specs import CorruptionSpec, SceneSpec


@dataclass(frozen=True, eq=False)
class SimulatedSample:
    image_id: str
    scene: Scene
    semantic: ProbVolume
    segments: list[InstanceSegment]


def scene_image_id(index: int) -> str:
    return f"scene_{index:05d}"


def simulate_sample(scene_spec: SceneSpec, corruption: CorruptionSpec, seed: int, index: int = 0) -> SimulatedSample:
    """GT scene plus both corrupted predictions for the index-th scene of a seeded run."""
    scene = generate_scene(scene_spec, seed=seed, index=index)
    semantic = simulate_semantic(scene.gt, scene.instances, corruption, seed, scene.catalog, index=index)
    segments = simulate_instances(
        scene.instances,
        corruption,
        seed,
        scene.dims,
        scene.catalog,
        shape_library=scene_spec.shape_library,
        index=index,
    )
    return SimulatedSample(scene_image_id(index), scene, semantic, segments)
