"""
Tests for catalogs, signatures and portrait classification
"""

import pytest

from utils.catalog import (CUBIC_ALIASES, FAMILY_SIZES, QUARTIC_COARSE, Family, catalog,
                           coarse_classes, entry)
from utils.config import AnalysisConfig
from utils.error_handler import NoMatch, UnsupportedKind
from utils.fieldspec import parse_field
from utils.portrait import (Confidence, GeometryHint, classify_portrait, family_of,
                            geometry_hint, infinity_code, profile_distance, reversal_key,
                            signature, template)


class TestCatalog:
    """Test the catalog tables"""

    def test_family_sizes(self):
        """Test the number of portraits per family"""
        assert FAMILY_SIZES == {
            Family.QUAD: 3, Family.CUBIC: 9, Family.QUARTIC: 29, Family.INV_QUAD: 3,
            Family.INV_CUBIC: 4, Family.INV_QUARTIC: 11, Family.MOEBIUS: 9,
        }

    def test_coarse_classes(self):
        """Test merging nodes with foci leaves 22 quartic classes"""
        classes = coarse_classes()
        assert len(classes) == 22
        assert not set(QUARTIC_COARSE) & set(classes)
        assert entry(Family.QUARTIC, 'Q4').coarse_label == 'Q22'

    def test_realizing_systems_parse(self):
        """Test every realizing system is a valid field"""
        for family in Family:
            for item in catalog(family):
                if item.system:
                    parse_field(item.system)

    def test_unknown_label(self):
        """Test lookups of missing labels"""
        with pytest.raises(KeyError):
            entry(Family.CUBIC, 'c10')


class TestSignatureHelpers:
    """Test keys, geometry and codes"""

    def test_reversal_key(self):
        """Test time reversal maps a multiset to the same key"""
        assert reversal_key(['F+', 'N-', 'C']) == reversal_key(['F-', 'N+', 'C'])
        assert reversal_key(['M2', 'F+', 'F+']) == ('F+', 'F+', 'M2')

    def test_geometry(self):
        """Test the four arrangements of four points"""
        assert geometry_hint([0, 1, 2, 3]) is GeometryHint.COLLINEAR
        assert geometry_hint([0, 1, 2, 3 + 12j]) is GeometryHint.BORDER
        assert geometry_hint([0, 3 + 2j, 5 / 3, 3 - 2j]) is GeometryHint.TRIANGLE
        assert geometry_hint([0, 3, 2j, 2 + 2j]) is GeometryHint.QUADRILATERAL
        assert geometry_hint([0, 1, 2]) is GeometryHint.NONE

    def test_profile_distance(self):
        """Test profiles of one field are at distance zero"""
        sig = signature(parse_field("z*(z-1)*(z-2)*(z-3)"), trace=False)
        assert profile_distance(sig.profile, sig.profile) == 0
        other = signature(parse_field("z^2*(z-1)*(z+1)"), trace=False)
        assert profile_distance(sig.profile, other.profile) == float('inf')

    def test_empty_infinity_code(self):
        """Test fields without equator saddles have an empty code"""
        assert infinity_code([], [], {}) == ''

    def test_signature_without_tracing(self):
        """Test the untraced signature of a cubic"""
        sig = signature(parse_field("z*(z-1)*(z-2)"), trace=False)
        assert sig.finite_multiset == ('N+', 'N+', 'N-')
        assert sig.infinity_summary == (2, ('S', 'S', 'S', 'S'))
        assert sig.connections == ()
        assert sig.geometry_hint is GeometryHint.NONE

    def test_signature_of_inverse(self):
        """Test inverse fields report their model at infinity"""
        sig = signature(parse_field("1/z^2"), trace=False)
        assert sig.finite_multiset == ('P2',)
        assert sig.infinity_summary == (None, ("(1/z)^2",))

    def test_essential_refused(self):
        """Test the essential demo has no signature"""
        with pytest.raises(UnsupportedKind):
            signature(parse_field("essential(1;2)"))


class TestFamilies:
    """Test which catalog a field is matched against"""

    def test_family_of(self):
        """Test families by kind and degree"""
        assert family_of(parse_field("z^2")) is Family.QUAD
        assert family_of(parse_field("1/z^3")) is Family.INV_CUBIC
        assert family_of(parse_field("conj(z^4+1)")) is Family.INV_QUARTIC
        assert family_of(parse_field("(1+1i)z")) is Family.MOEBIUS
        assert family_of(parse_field("1/(z-1)")) is Family.MOEBIUS

    def test_unsupported_degree(self):
        """Test degrees without a catalog"""
        with pytest.raises(UnsupportedKind):
            family_of(parse_field("z^5"))
        with pytest.raises(UnsupportedKind):
            family_of(parse_field("essential(1;2)"))


class TestRuleBased:
    """Test the rule-based families"""

    @pytest.mark.parametrize('item', catalog(Family.QUAD) + catalog(Family.CUBIC)
                             + catalog(Family.MOEBIUS), ids=lambda e: e.label)
    def test_realizing_system(self, item):
        """Test each realizing system is classified as its own entry"""
        result = classify_portrait(parse_field(item.system))
        assert result.family is item.family
        assert result.label == item.label
        assert result.confidence is Confidence.EXACT

    def test_cubic_alias(self):
        """Test center, focus and node share the c8 portrait"""
        assert CUBIC_ALIASES[('C', 'F', 'N')] == 'c8'

    def test_moebius_centers_by_rotation(self):
        """Test the sense of rotation splits the centers with a pole"""
        ccw = classify_portrait(parse_field("moebius(1;0;1;-1i)"))
        cw = classify_portrait(parse_field("moebius(1;0;1;1i)"))
        assert (ccw.label, cw.label) == ('M7', 'M9')

    def test_linear_fields(self):
        """Test degree-one fields land in the Moebius family"""
        assert classify_portrait(parse_field("(1+1i)*z + 1")).label == 'M3'
        assert classify_portrait(parse_field("-z")).label == 'M6'
        assert classify_portrait(parse_field("1/(z-1)")).label == 'M1'
        assert classify_portrait(parse_field("conj(2z+1)")).label == 'M1'

    def test_tolerance_band_is_flagged(self):
        """Test an eigenvalue inside the band gives a flagged label"""
        result = classify_portrait(parse_field("(1+1e-7i)*z"))
        assert result.label == 'M3'
        assert result.confidence is Confidence.FLAGGED


class TestTemplateMatching:
    """Test matching against realizing systems"""

    def setup_method(self):
        """Setup test environment"""
        self.config = AnalysisConfig()

    def test_unique_multiset(self):
        """Test a key shared with no other entry needs no tracing"""
        result = classify_portrait(parse_field("z^4"), self.config)
        assert (result.label, result.confidence) == ('Q1', Confidence.EXACT)
        assert result.signature.connections == ()

    def test_geometry_separates_centers(self):
        """Test four collinear centers against four centers around a triangle"""
        assert classify_portrait(parse_field("z*(z-1i)*(z-2i)*(z-3i)"), self.config).label == 'Q2'
        result = classify_portrait(parse_field("z*(z^3-1/3i)"), self.config)
        assert (result.label, result.confidence) == ('Q28', Confidence.EXACT)

    def test_inverse_pole_of_high_order(self):
        """Test 1/z^3 and its conjugate twin"""
        assert classify_portrait(parse_field("1/z^3"), self.config).label == 'Sc1'
        assert classify_portrait(parse_field("conj(z^3)"), self.config).label == 'Sc1'

    def test_coarse_merges_keep_counts(self):
        """Test each coarse merge only trades nodes for foci"""
        def coarse(tokens):
            return sorted('F' if t[0] in 'NF' else t for t in tokens)

        def multiple(tokens):
            return sorted(t for t in tokens if t[0] == 'M')

        assert QUARTIC_COARSE['Q21'] == 'Q8'
        for label, merged in QUARTIC_COARSE.items():
            fine = template(Family.QUARTIC, label, self.config).finite_multiset
            kept = template(Family.QUARTIC, merged, self.config).finite_multiset
            assert coarse(fine) == coarse(kept), label
            assert fine.count('C') == kept.count('C'), label
            assert multiple(fine) == multiple(kept), label

    def test_no_match(self):
        """Test a quartic multiset outside the catalog"""
        with pytest.raises(NoMatch) as info:
            classify_portrait(parse_field("z^2*(z-1)^2"), self.config)
        assert info.value.nearest is not None
        assert info.value.diff['found'] == ['M2', 'M2']

    @pytest.mark.slow
    def test_connected_poles(self):
        """Test stream-value connections separate the two simple-pole portraits"""
        connected = classify_portrait(parse_field("1/(z*(z-1))"), self.config)
        assert connected.label == 'S2'
        assert connected.candidates[0] == 'S2'
        apart = classify_portrait(parse_field("1/(z*(z-1i))"), self.config)
        assert apart.label == 'S3'

    @pytest.mark.slow
    @pytest.mark.parametrize('label', ['Q4', 'Q22', 'Q25', 'Q26', 'Q27'])
    def test_quartic_realizing_system(self, label):
        """Test quartic systems sharing a multiset are told apart"""
        item = entry(Family.QUARTIC, label)
        result = classify_portrait(parse_field(item.system), self.config)
        assert result.label == label
        assert result.coarse == item.coarse_label
