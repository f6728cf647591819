import json

import numpy as np
import pytest

from ufrank import Numeric, SynthSpec, load_csv, make_planted, write_planted


class TestSynthSpecValidation:
    def test_field_checks(self):
        with pytest.raises(ValueError, match="two clusters"):
            SynthSpec(clusters=1)
        with pytest.raises(ValueError, match="per cluster"):
            SynthSpec(m=3, clusters=4)
        with pytest.raises(ValueError, match="informative"):
            SynthSpec(n_informative=0)
        with pytest.raises(ValueError, match="noise"):
            SynthSpec(n_noise=-1)
        with pytest.raises(ValueError, match="separation"):
            SynthSpec(separation=0.0)
        with pytest.raises(ValueError, match="seed"):
            SynthSpec(seed=-1)


class TestMakePlanted:
    def spec(self, **kw):
        base = dict(m=80, n_informative=4, n_noise=16, clusters=4,
                    separation=6.0, seed=9)
        base.update(kw)
        return SynthSpec(**base)

    def test_shape_and_typing(self):
        d = make_planted(self.spec())
        assert (d.m, d.n) == (80, 20)
        assert all(isinstance(k, Numeric) for k in d.kinds)
        assert d.target is not None and d.target.shape == (80,)
        assert d.name == "planted_s9"
        assert make_planted(self.spec(name="custom")).name == "custom"
        assert len(set(d.attr_names)) == 20

    def test_classes_are_balanced(self):
        d = make_planted(self.spec(m=79))
        _, counts = np.unique(d.target, return_counts=True)
        assert counts.size == 4
        assert counts.max() - counts.min() <= 1

    def test_deterministic_per_seed(self):
        a = make_planted(self.spec())
        b = make_planted(self.spec())
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.target, b.target)
        assert a.meta["informative"] == b.meta["informative"]
        c = make_planted(self.spec(seed=10))
        assert not np.array_equal(a.X, c.X)

    def test_recorded_positions_hold_the_planted_structure(self):
        # informative columns mix unit-noise Gaussians with centers one
        # separation apart, so their spread dwarfs the uniform noise columns
        d = make_planted(self.spec())
        info = set(d.meta["informative"])
        assert len(info) == 4
        variances = d.X.var(axis=0)
        info_mask = np.zeros(d.n, dtype=bool)
        info_mask[list(info)] = True
        assert variances[info_mask].min() > 2.0
        assert variances[~info_mask].max() < 0.5
        noise = d.X[:, ~info_mask]
        assert noise.min() >= 0.0 and noise.max() <= 1.0

    def test_class_structure_sits_on_informative_axes(self):
        d = make_planted(self.spec(separation=8.0))
        labels = d.target
        for j in d.meta["informative"]:
            col = d.X[:, j]
            centers = np.array([col[labels == c].mean() for c in range(4)])
            within = max(col[labels == c].std() for c in range(4))
            gaps = np.diff(np.sort(centers))
            assert gaps.min() > 4 * within / 2

    def test_spec_round_trips_in_meta(self):
        spec = self.spec()
        d = make_planted(spec)
        assert d.meta["spec"]["m"] == 80
        assert d.meta["spec"]["separation"] == 6.0
        assert SynthSpec(**d.meta["spec"]) == spec


class TestWritePlanted:
    def test_files_and_round_trip(self, tmp_path):
        spec = SynthSpec(m=40, n_informative=3, n_noise=5, clusters=2,
                         separation=5.0, seed=3)
        csv_path, truth_path = write_planted(spec, tmp_path)
        assert csv_path.name == "planted_s3.csv"
        assert truth_path.name == "planted_s3_truth.json"

        original = make_planted(spec)
        back = load_csv(csv_path, target_column="target")
        assert (back.m, back.n) == (original.m, original.n)
        np.testing.assert_allclose(back.X, original.X, rtol=1e-15)
        np.testing.assert_array_equal(back.target, original.target)

        truth = json.loads(truth_path.read_text(encoding="utf-8"))
        assert truth["informative"] == list(original.meta["informative"])
        assert truth["spec"]["seed"] == 3
