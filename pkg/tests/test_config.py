import pytest

from mcdre.config import RunConfig
from mcdre.errors import ConfigError


class TestValidation:
    def test_defaults_are_valid(self):
        cfg = RunConfig()
        assert cfg.d_model == 128 and cfg.lr == 4e-4
        assert cfg.batch_size == 32 and cfg.dropout == 0.5
        assert cfg.ffn_dim == 256

    def test_heads_must_divide_d_model(self):
        with pytest.raises(ConfigError):
            RunConfig(d_model=10, n_heads=3)

    def test_dropout_range(self):
        with pytest.raises(ConfigError):
            RunConfig(dropout=1.0)
        with pytest.raises(ConfigError):
            RunConfig(dropout=-0.1)

    def test_lr_positive(self):
        with pytest.raises(ConfigError):
            RunConfig(lr=0.0)

    def test_se_required(self):
        with pytest.raises(ConfigError):
            RunConfig(active_aspects=("sy", "do"))

    def test_unknown_aspect(self):
        with pytest.raises(ConfigError):
            RunConfig(active_aspects=("se", "zz"))

    def test_aspects_normalized_to_canonical_order(self):
        cfg = RunConfig(active_aspects=("do", "se"))
        assert cfg.active_aspects == ("se", "do")

    def test_bad_cross_mode(self):
        with pytest.raises(ConfigError):
            RunConfig(cross_mode="magic")

    def test_bad_embedding(self):
        with pytest.raises(ConfigError):
            RunConfig(embedding="/some/path")


class TestTextRoundTrip:
    def test_round_trip_identity(self):
        cfg = RunConfig(d_model=16, n_heads=2, dropout=0.25, cross_mode="ffn",
                        active_aspects=("se", "do"), include_own=True,
                        embedding="external:emb.txt", clip_norm=None, d_ff=48)
        back = RunConfig.from_text(cfg.to_text())
        assert back == cfg
        assert back.to_text() == cfg.to_text()

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            RunConfig.from_text("d_model = 8\nwarp_speed = 9\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            RunConfig.from_text("seed = 1\nseed = 2\n")

    def test_bad_value_names_line(self):
        with pytest.raises(ConfigError, match=":2"):
            RunConfig.from_text("seed = 1\nd_model = much\n")

    def test_comments_and_blanks_ignored(self):
        cfg = RunConfig.from_text("# a comment\n\nseed = 5\n")
        assert cfg.seed == 5

    def test_from_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("d_model = 8\nn_heads = 2\ndropout = 0.0\n")
        cfg = RunConfig.from_file(path)
        assert cfg.d_model == 8

    def test_validation_failure_names_source(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("d_model = 9\nn_heads = 2\n")
        with pytest.raises(ConfigError, match="run.cfg"):
            RunConfig.from_file(path)
