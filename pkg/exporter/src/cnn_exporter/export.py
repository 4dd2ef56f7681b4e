"""Multiscale activation export from pretrained torchvision models.

For each target spatial size (28, 14, 7 on a 224x224 input) the
exporter selects the last module in execution order whose output is a
square activation grid of that size, i.e. the final layer of the
network stage operating at that resolution.
"""

from dataclasses import dataclass

import numpy as np
import torch
from PIL import Image
from torchvision import models as tvm

from .fmap_writer import write_fmap

INPUT_SIZE = 224
TARGET_SIZES = (28, 14, 7)
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)
RANDOM_INIT_SEED = 0

MODEL_BUILDERS = {
    "shufflenet": (tvm.shufflenet_v2_x1_0, tvm.ShuffleNet_V2_X1_0_Weights.IMAGENET1K_V1),
    "googlenet": (tvm.googlenet, tvm.GoogLeNet_Weights.IMAGENET1K_V1),
    "resnet18": (tvm.resnet18, tvm.ResNet18_Weights.IMAGENET1K_V1),
    "resnet101": (tvm.resnet101, tvm.ResNet101_Weights.IMAGENET1K_V1),
    "vgg16": (tvm.vgg16, tvm.VGG16_Weights.IMAGENET1K_V1),
    "vgg19": (tvm.vgg19, tvm.VGG19_Weights.IMAGENET1K_V1),
}


@dataclass(frozen=True)
class SelectedLayer:
    name: str
    spatial: int
    channels: int


def supported_models():
    return sorted(MODEL_BUILDERS)


def build_model(model_name: str, weights: str = "pretrained") -> torch.nn.Module:
    if model_name not in MODEL_BUILDERS:
        raise ValueError(
            f"unknown model {model_name!r}; supported: {', '.join(supported_models())}"
        )
    builder, weight_enum = MODEL_BUILDERS[model_name]
    if weights == "pretrained":
        try:
            model = builder(weights=weight_enum)
        except Exception as exc:  # weight download needs network access
            raise RuntimeError(
                f"could not load pretrained weights for {model_name} ({exc}); "
                "pass --weights random for a deterministic offline run"
            ) from exc
    elif weights == "random":
        torch.manual_seed(RANDOM_INIT_SEED)
        kwargs = {"init_weights": True} if model_name == "googlenet" else {}
        model = builder(weights=None, **kwargs)
    else:
        raise ValueError(f"weights must be 'pretrained' or 'random', got {weights!r}")
    model.eval()
    return model


def load_input(image_path) -> torch.Tensor:
    with Image.open(image_path) as im:
        rgb = im.convert("RGB").resize((INPUT_SIZE, INPUT_SIZE), Image.BILINEAR)
    arr = np.asarray(rgb, dtype=np.float32) / 255.0
    arr = (arr - np.asarray(IMAGENET_MEAN, dtype=np.float32)) / np.asarray(
        IMAGENET_STD, dtype=np.float32
    )
    return torch.from_numpy(arr.transpose(2, 0, 1)).unsqueeze(0)


def _capture_activations(model: torch.nn.Module, batch: torch.Tensor):
    # record (execution order, module name, output) for every module
    # emitting a square activation grid at one of the target sizes
    records = []
    handles = []

    def make_hook(name):
        def hook(_module, _inputs, output):
            if (
                isinstance(output, torch.Tensor)
                and output.ndim == 4
                and output.shape[0] == 1
                and output.shape[2] == output.shape[3]
                and output.shape[2] in TARGET_SIZES
            ):
                records.append((len(records), name, output.detach()))

        return hook

    for name, module in model.named_modules():
        if name:
            handles.append(module.register_forward_hook(make_hook(name)))
    try:
        with torch.inference_mode():
            model(batch)
    finally:
        for h in handles:
            h.remove()

    last_per_size = {}
    for order, name, output in records:
        last_per_size[output.shape[2]] = (order, name, output)
    missing = [s for s in TARGET_SIZES if s not in last_per_size]
    if missing:
        raise RuntimeError(f"no layer produced spatial size(s) {missing} on a {INPUT_SIZE} input")
    return {size: last_per_size[size] for size in TARGET_SIZES}


def list_supported_layers(model_name: str, weights: str = "random"):
    """The layers the exporter would select, as SelectedLayer rows in
    28 -> 14 -> 7 order."""
    model = build_model(model_name, weights)
    dummy = torch.zeros(1, 3, INPUT_SIZE, INPUT_SIZE)
    selected = _capture_activations(model, dummy)
    return [
        SelectedLayer(name=name, spatial=size, channels=out.shape[1])
        for size, (_, name, out) in selected.items()
    ]


def export_feature_stack(model_name: str, image_path, out_path, weights: str = "pretrained"):
    """Run the model on the image and write the three selected scales
    as an FMAP file. Returns the SelectedLayer rows."""
    model = build_model(model_name, weights)
    batch = load_input(image_path)
    selected = _capture_activations(model, batch)
    maps = []
    rows = []
    for scale_id, size in enumerate(TARGET_SIZES):
        _, name, out = selected[size]
        values = out[0].cpu().numpy().astype(np.float32)
        if not np.isfinite(values).all():
            raise RuntimeError(f"non-finite activations in layer {name}")
        maps.append((scale_id, values))
        rows.append(SelectedLayer(name=name, spatial=size, channels=values.shape[0]))
    write_fmap(out_path, INPUT_SIZE, INPUT_SIZE, maps)
    return rows
