"""Built-in scene and corruption configurations (plain dicts, validated by the loaders)."""


def _rect(x=0.0, y=0.0, w=1.0, h=1.0):
    return {"kind": "rect", "x": x, "y": y, "w": w, "h": h}


def _disc(x=0.0, y=0.0, w=1.0, h=1.0):
    return {"kind": "disc", "x": x, "y": y, "w": w, "h": h}


def _template(width, height, parts, scale=(0.85, 1.2), aspect=(0.9, 1.1)):
    return {"width": width, "height": height, "parts": parts, "scale": list(scale), "aspect": list(aspect)}


# A handful of silhouettes per class, reused across many placements
SHAPES = {
    "car": [
        _template(32, 16, [_rect(0, 0.4, 1, 0.6), _rect(0.2, 0, 0.6, 0.5)]),
        _template(30, 15, [_rect(0, 0.35, 1, 0.65), _rect(0.1, 0, 0.55, 0.45)]),
        _template(34, 18, [_rect(0, 0.3, 1, 0.7), _rect(0.15, 0, 0.7, 0.4), _disc(0.05, 0.65, 0.25, 0.35)]),
    ],
    "truck": [
        _template(44, 24, [_rect(0, 0.25, 0.3, 0.75), _rect(0.28, 0, 0.72, 0.85)]),
        _template(40, 22, [_rect(0.7, 0.2, 0.3, 0.8), _rect(0, 0, 0.72, 0.9)]),
    ],
    "bus": [
        _template(56, 26, [_rect(0, 0.04, 1, 0.96)]),
        _template(52, 24, [_rect(0, 0, 1, 0.9), _disc(0.08, 0.7, 0.15, 0.3), _disc(0.77, 0.7, 0.15, 0.3)]),
    ],
    "train": [
        _template(84, 28, [_rect(0, 0.05, 1, 0.95)], scale=(0.9, 1.1)),
    ],
    "person": [
        _template(8, 22, [_disc(0.25, 0, 0.5, 0.22), _rect(0.05, 0.2, 0.9, 0.45), _rect(0.2, 0.62, 0.6, 0.38)]),
        _template(9, 23, [_disc(0.28, 0, 0.45, 0.2), _rect(0.1, 0.18, 0.8, 0.5), _rect(0.1, 0.66, 0.35, 0.34), _rect(0.55, 0.66, 0.35, 0.34)]),
    ],
    "rider": [
        _template(14, 26, [_disc(0.35, 0, 0.3, 0.15), _rect(0.3, 0.13, 0.4, 0.4), _disc(0, 0.55, 0.45, 0.45), _disc(0.55, 0.55, 0.45, 0.45), _rect(0.2, 0.5, 0.6, 0.2)]),
    ],
    "motorcycle": [
        _template(20, 13, [_disc(0, 0.45, 0.35, 0.55), _disc(0.65, 0.45, 0.35, 0.55), _rect(0.2, 0.1, 0.6, 0.55)]),
        _template(22, 14, [_disc(0, 0.5, 0.3, 0.5), _disc(0.7, 0.5, 0.3, 0.5), _rect(0.15, 0.15, 0.7, 0.5)]),
    ],
    "bicycle": [
        _template(18, 12, [_disc(0, 0.4, 0.4, 0.6), _disc(0.6, 0.4, 0.4, 0.6), _rect(0.2, 0.3, 0.6, 0.3)]),
    ],
    "traffic light": [
        _template(6, 14, [_rect()], scale=(0.9, 1.3)),
        _template(6, 16, [_rect(0, 0, 1, 0.8), _rect(0.3, 0.8, 0.4, 0.2)], scale=(0.9, 1.3)),
    ],
    "traffic sign": [
        _template(10, 10, [_disc()], scale=(0.8, 1.4)),
        _template(10, 10, [_rect()], scale=(0.8, 1.4)),
    ],
}

ROAD_USERS = ["car", "truck", "bus", "train", "motorcycle", "bicycle", "rider"]

CITY_BANDS = [
    {"class_name": "sky", "fraction": 0.25},
    {"class_name": "building", "fraction": 0.22},
    {"class_name": "vegetation", "fraction": 0.08},
    {"class_name": "sidewalk", "fraction": 0.12},
    {"class_name": "road", "fraction": 0.33},
]

CITY_ANCHORS = {
    **{name: "road" for name in ROAD_USERS},
    "person": "sidewalk",
    "traffic light": "building",
    "traffic sign": "building",
}

# Unique 3D models and total placements per class in the synthetic source dataset
INSTANCE_STATS = {
    "traffic light": (3, 101771),
    "traffic sign": (69, 261015),
    "person": (31, 176552),
    "rider": (1, 67073),
    "car": (13, 148760),
    "truck": (6, 26847),
    "bus": (3, 45082),
    "train": (3, 12071),
    "motorcycle": (7, 50687),
    "bicycle": (4, 67672),
}


def _city(counts, width=256, height=128, library=None):
    return {
        "catalog": "cityscapes19",
        "width": width,
        "height": height,
        "bands": CITY_BANDS,
        "instance_counts": counts,
        "shape_library": library or {name: SHAPES[name] for name in counts},
        "anchors": {name: CITY_ANCHORS[name] for name in counts},
    }


def urban():
    """Default Cityscapes-like street: 24 objects over five background bands."""
    return _city({
        "car": 8, "person": 5, "rider": 2, "truck": 1, "bus": 1,
        "bicycle": 2, "motorcycle": 1, "traffic light": 2, "traffic sign": 2,
    })


def multi_class():
    """Complex city scene with every thing class present."""
    return _city({
        "car": 10, "person": 8, "rider": 2, "truck": 2, "bus": 1, "train": 1,
        "bicycle": 3, "motorcycle": 2, "traffic light": 3, "traffic sign": 4,
    }, width=512, height=256)


def single_class(class_name: str = "car", count: int = 3):
    """One thing class on a single road with background items."""
    spec = _city({class_name: count})
    spec["bands"] = [
        {"class_name": "sky", "fraction": 0.3},
        {"class_name": "building", "fraction": 0.25},
        {"class_name": "vegetation", "fraction": 0.1},
        {"class_name": "sidewalk", "fraction": 0.1},
        {"class_name": "road", "fraction": 0.25},
    ]
    return spec


def instance_stats(scale: int = 12071):
    """Few templates, many placements: per-class counts follow the source dataset's
    instance statistics (one placement per `scale` instances), templates are capped
    at the number of unique models."""
    counts = {name: max(1, round(total / scale)) for name, (_, total) in INSTANCE_STATS.items()}
    library = {name: SHAPES[name][:unique] for name, (unique, _) in INSTANCE_STATS.items()}
    return _city(counts, width=512, height=256, library=library)


def camvid():
    return {
        "catalog": "camvid11",
        "width": 240,
        "height": 180,
        "bands": [
            {"class_name": "sky", "fraction": 0.25},
            {"class_name": "building", "fraction": 0.25},
            {"class_name": "vegetation", "fraction": 0.1},
            {"class_name": "sidewalk", "fraction": 0.1},
            {"class_name": "road", "fraction": 0.3},
        ],
        "instance_counts": {"car": 6, "pedestrian": 4, "cyclist": 2, "sign": 2},
        "shape_library": {
            "car": SHAPES["car"],
            "pedestrian": SHAPES["person"],
            "cyclist": SHAPES["rider"],
            "sign": SHAPES["traffic sign"],
        },
        "anchors": {"car": "road", "pedestrian": "sidewalk", "cyclist": "road", "sign": "building"},
    }


SCENE_PRESETS = {
    "urban": urban,
    "multi_class": multi_class,
    "single_class": single_class,
    "instance_stats": instance_stats,
    "camvid": camvid,
}


def identity():
    return {}


def acceptance():
    """Texture-confused segmentation, shape-faithful detection."""
    return {
        "semantic": {"fg_confusion": 0.4},
        "instance": {"miss_rate": 0.1, "mask_jitter": 1},
    }


def realistic():
    return {
        "semantic": {"fg_confusion": 0.4, "boundary_jitter": 1, "bg_noise": 0.01},
        "instance": {"miss_rate": 0.1, "mask_jitter": 1, "spurious_rate": 0.5, "score_noise": 0.05},
    }


CORRUPTION_PRESETS = {
    "identity": identity,
    "acceptance": acceptance,
    "realistic": realistic,
}
