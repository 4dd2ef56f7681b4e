import numpy as np
import pytest
from PIL import Image

from cnn_exporter.cli import main as cli_main
from cnn_exporter.export import (
    export_feature_stack,
    list_supported_layers,
    supported_models,
)

from mmreg.fmap import read_feature_stack


@pytest.fixture(scope="module")
def sample_image(tmp_path_factory):
    rng = np.random.default_rng(7)
    base = rng.integers(0, 256, (160, 200, 3), dtype=np.uint8)
    path = tmp_path_factory.mktemp("img") / "sample.png"
    Image.fromarray(base).save(path)
    return str(path)


@pytest.mark.parametrize("model_name", ["resnet18", "vgg16"])
class TestExport:
    def test_three_scales_and_reader_validation(self, model_name, sample_image, tmp_path):
        out = tmp_path / f"{model_name}.fmap"
        rows = export_feature_stack(model_name, sample_image, out, weights="random")
        assert [r.spatial for r in rows] == [28, 14, 7]
        stack = read_feature_stack(out)
        assert (stack.source_w, stack.source_h) == (224, 224)
        assert [(m.grid_h, m.grid_w) for m in stack.maps] == [(28, 28), (14, 14), (7, 7)]
        assert [m.scale_id for m in stack.maps] == [0, 1, 2]
        for m, row in zip(stack.maps, rows):
            assert m.channels == row.channels
            assert np.isfinite(m.values).all()

    def test_byte_identical_across_runs(self, model_name, sample_image, tmp_path):
        a = tmp_path / "a.fmap"
        b = tmp_path / "b.fmap"
        export_feature_stack(model_name, sample_image, a, weights="random")
        export_feature_stack(model_name, sample_image, b, weights="random")
        assert a.read_bytes() == b.read_bytes()


def test_layer_table_spatial_sizes():
    rows = list_supported_layers("resnet18", weights="random")
    assert [r.spatial for r in rows] == [28, 14, 7]
    assert all(r.channels >= 1 for r in rows)
    assert [r.name for r in rows] == ["layer2", "layer3", "layer4"]


def test_unknown_model_lists_supported():
    with pytest.raises(ValueError, match="supported"):
        list_supported_layers("alexnet")
    assert "resnet18" in supported_models()


def test_cli_export_and_errors(sample_image, tmp_path, capsys):
    out = str(tmp_path / "cli.fmap")
    rc = cli_main(["export", "--model", "resnet18", "--weights", "random",
                   "--image", sample_image, "--out", out])
    assert rc == 0
    stack = read_feature_stack(out)
    assert len(stack.maps) == 3

    rc = cli_main(["export", "--model", "nope", "--weights", "random",
                   "--image", sample_image, "--out", out])
    assert rc == 1
    assert "supported" in capsys.readouterr().err

    rc = cli_main(["layers", "--model", "vgg16"])
    assert rc == 0
    assert "28" in capsys.readouterr().out
