"""
Tests for finite groups, Galois covers and their constructions.
"""

import pytest
from diffqe.algebra.fields import Field
from diffqe.covers import (
    FiniteGroupDesc,
    GaloisCoverDesc,
    cyclic_group,
    find_group_element,
    galois_closure,
    lift_classes,
    local_frobenius,
    permutation_group,
    product_cover,
    product_group,
    pushforward_cover,
    quotient_group,
    symmetric_group,
    to_direct_cover,
    twisted_closure,
    validate_cover,
)
from diffqe.covers.groups import preimage
from diffqe.data import load_catalog
from diffqe.errors import DecompositionIncomplete, InvalidCover, NoGroupElement, NotEtale
from diffqe.points import DiffField
from diffqe.presentations import DirectPresentation, PresentationMorphism


@pytest.fixture(scope="module")
def catalog():
    return load_catalog()


@pytest.fixture
def kummer(catalog):
    return catalog.covers["kummer"]


class TestGroups:
    """Tests for finite group descriptions."""

    def test_cyclic(self):
        """Test the labels and multiplication of Z/3."""
        G = cyclic_group(3)
        assert G.elements == ("e", "g", "g^2")
        assert G.mult("g", "g") == "g^2"
        assert G.inverse("g") == "g^2"
        assert G.validate() == []

    def test_symmetric(self):
        """Test the order of S3 and its identity label."""
        S3 = symmetric_group(3)
        assert S3.order == 6
        assert S3.identity == "123"
        assert S3.validate() == []

    def test_permutation_labels(self):
        """Test one-line labels."""
        assert permutation_group([(0, 1, 2), (1, 0, 2)]).elements == ("123", "213")

    def test_quotient(self):
        """Test Z/4 modulo its subgroup of order 2."""
        G = cyclic_group(4)
        quotient, surjection = quotient_group(G, ["e", "g^2"])
        assert quotient.elements == ("e", "g")
        assert surjection == {"e": "e", "g": "g", "g^2": "e", "g^3": "g"}
        assert G.is_homomorphism(quotient, surjection)
        assert quotient.validate() == []

    def test_quotient_needs_normal_subgroup(self):
        """Test that a non-normal subgroup of S3 is refused."""
        with pytest.raises(InvalidCover, match="not normal"):
            quotient_group(symmetric_group(3), ["123", "213"])
        with pytest.raises(InvalidCover, match="not a subgroup"):
            quotient_group(cyclic_group(4), ["e", "g"])

    def test_product(self):
        """Test the Klein four group."""
        V = product_group(cyclic_group(2), cyclic_group(2))
        assert V.order == 4
        assert V.mult("(g,g)", "(g,g)") == "(e,e)"

    def test_missing_inverse(self):
        """Test that axiom violations are reported."""
        G = FiniteGroupDesc(("e", "a"), (("e", "a"), ("a", "a")))
        assert any("no inverse" in msg for msg in G.validate())

    def test_bad_shape(self):
        """Test that the table must be square."""
        with pytest.raises(InvalidCover):
            FiniteGroupDesc(("e", "a"), (("e", "a"),))

    def test_json(self):
        """Test that a single element needs no table."""
        assert FiniteGroupDesc.from_json({"elements": ["e"]}).order == 1
        G = cyclic_group(2)
        assert FiniteGroupDesc.from_json(G.to_json()) == G


class TestTwistedClosure:
    """Tests for twisted conjugacy."""

    def test_abelian_untwisted(self):
        """Test that classes of an abelian group with equal maps are singletons."""
        G = cyclic_group(3)
        ident = {g: g for g in G.elements}
        assert twisted_closure(["g"], G, G, ident, ident).elements == frozenset({"g"})

    def test_trivial_twist(self):
        """Test that a trivial σ-homomorphism makes one class."""
        G = cyclic_group(3)
        ident = {g: g for g in G.elements}
        trivial = {g: "e" for g in G.elements}
        assert twisted_closure(["e"], G, G, ident, trivial).elements == frozenset(G.elements)

    def test_unknown_label(self):
        """Test that labels must belong to G0."""
        G = cyclic_group(2)
        ident = {g: g for g in G.elements}
        with pytest.raises(InvalidCover):
            twisted_closure(["h"], G, G, ident, ident)

    def test_domain_is_sorted(self):
        """Test domain iteration order and JSON."""
        G = cyclic_group(3)
        trivial = {g: "e" for g in G.elements}
        domain = twisted_closure(["g"], G, G, {g: g for g in G.elements}, trivial)
        assert list(domain) == ["e", "g", "g^2"]
        assert domain.to_json() == ["e", "g", "g^2"]


class TestKummerCover:
    """Tests on the square-root cover of the fixed line."""

    def test_valid(self, kummer):
        """Test the cover axioms and the branch locus."""
        report = validate_cover(kummer)
        assert report.valid, report.errors
        assert report.faithful
        assert report.branch0 == ["x0"]

    def test_fibre_transitivity(self, kummer):
        """Test that étale fibres over F7 are single orbits."""
        K = DiffField.from_q(kummer.base.field, 7)
        assert validate_cover(kummer, sample=K).valid

    @pytest.mark.parametrize("x,expected", [((2,), ["e"]), ((3,), ["g"]), ((1,), ["e"]), ((6,), ["g"])])
    def test_local_frobenius(self, kummer, x, expected):
        """Test that the Frobenius class detects squares in F7."""
        K = DiffField.from_q(kummer.base.field, 7)
        assert sorted(local_frobenius(kummer, x, K)) == expected

    def test_lift_independence(self, kummer):
        """Test that every lift gives the same class."""
        K = DiffField.from_q(kummer.base.field, 7)
        classes = lift_classes(kummer, (3,), K)
        assert len(classes) == 2
        assert all(c == frozenset({"g"}) for c in classes)

    def test_ramified(self, kummer):
        """Test that the origin is a branch point."""
        K = DiffField.from_q(kummer.base.field, 7)
        with pytest.raises(NotEtale):
            local_frobenius(kummer, (0,), K)

    def test_find_group_element(self, kummer):
        """Test the element swapping the two square roots of 2."""
        K = DiffField.from_q(kummer.base.field, 7)
        assert find_group_element(kummer, (2, 3), (2, 4), K) == "g"
        assert find_group_element(kummer, (2, 3), (2, 3), K) == "e"
        with pytest.raises(NoGroupElement):
            find_group_element(kummer, (2, 3), (2, 5), K)
        with pytest.raises(ValueError):
            find_group_element(kummer, (2, 3), (1, 1), K)

    def test_json_round_trip(self, kummer):
        """Test that the canonical form describes the same cover."""
        again = GaloisCoverDesc.from_json(kummer.to_json(), kummer.base)
        assert again.G0 == kummer.G0
        assert again.cover.key() == kummer.cover.key()

    def test_trivial(self, kummer):
        """Test the trivial cover of the base."""
        trivial = GaloisCoverDesc.trivial(kummer.base)
        assert trivial.is_trivial
        assert not kummer.is_trivial
        K = DiffField.from_q(kummer.base.field, 7)
        assert sorted(local_frobenius(trivial, (0,), K)) == ["e"]

    def test_product(self, kummer):
        """Test the product of the cover with itself."""
        product = product_cover(kummer, kummer)
        assert product.G0.order == 4
        assert len(product.fibre) == 2

    def test_direct_cover_is_unchanged(self, kummer):
        """Test that a cover without extra coordinates is already direct."""
        assert to_direct_cover(kummer) is kummer

    def test_direct_component_of_fibre_product(self, catalog):
        """Test that the full fibre product keeps the untwisted graph and its stabiliser."""
        D = catalog.covers["kummer_full"]
        direct = to_direct_cover(D)
        level1 = direct.level1_ideal()
        assert level1.contains(level1.ring.parse("w0 - z0"))
        assert direct.G1.elements == ("e", "st")
        assert direct.hom_pi1 == {"e": "e", "st": "g"}
        assert validate_cover(direct).valid


class TestConstructions:
    """Tests for Galois closures and pushforwards."""

    def test_closure_of_squaring(self):
        """Test that squaring on the line has a degree two closure."""
        line = DirectPresentation.from_json({"field": "Q", "n": 1, "I0": ["0"], "I1": ["0"]})
        closure = galois_closure(PresentationMorphism.from_texts(line, line, ["x0^2"]))
        assert closure.degree == 2
        assert closure.cover.G0.order == 2

    def test_closure_of_cubing_on_fixed_line(self):
        """Test that cubing on the fixed line over F5 has a closure with group of order 6."""
        line = DirectPresentation.from_json({"field": "F5", "n": 1, "I0": ["0"], "I1": ["y0 - x0"]})
        closure = galois_closure(PresentationMorphism.from_texts(line, line, ["x0^3"]))
        assert closure.degree == 3
        assert closure.cover.G0.order == 6
        assert closure.cover.G1.order == 6

    def test_oversized_correspondence_fails_fast(self):
        """Test that a closure correspondence beyond the generic degree cap is reported."""
        line = DirectPresentation.from_json({"field": "F5", "n": 1, "I0": ["0"], "I1": ["0"]})
        with pytest.raises(DecompositionIncomplete, match="exceeds 24"):
            galois_closure(PresentationMorphism.from_texts(line, line, ["x0^3"]))

    def test_pushforward_of_trivial_cover(self):
        """Test that the trivial cover pushes forward to the trivial cover."""
        plane = DirectPresentation.from_json({"field": "Q", "n": 2, "I0": ["0"], "I1": ["0"]})
        line = DirectPresentation.from_json({"field": "Q", "n": 1, "I0": ["0"], "I1": ["0"]})
        projection = PresentationMorphism.projection(plane, line)
        pushed = pushforward_cover(projection, GaloisCoverDesc.trivial(plane))
        assert pushed.cover.is_trivial
        assert pushed.push_domain(["e"]) == ["e"]

    def test_pushforward_of_pulled_back_kummer(self, catalog):
        """Test that a cover pulled back from the line descends with the same group."""
        pushed = pushforward_cover(catalog.morphisms["plane_to_fixed_line"], catalog.covers["kummer_plane"])
        assert pushed.cover.cover.variables == ("x0", "z0")
        assert pushed.cover.G0.elements == ("e", "g")
        assert pushed.kernel == ["e"]
        assert pushed.push_domain(["g"]) == ["g"]

    def test_pushforward_to_quotient(self, catalog):
        """Test that only the part algebraic over the line survives, with an exact sequence of groups."""
        D = catalog.covers["kummer_pair"]
        pushed = pushforward_cover(catalog.morphisms["plane_to_fixed_line"], D)
        assert pushed.cover.cover.variables == ("x0", "z0")
        assert pushed.cover.G0.elements == ("e", "a")
        assert pushed.surjection == {"e": "e", "a": "a", "b": "e", "ab": "a"}
        assert D.G0.is_homomorphism(pushed.cover.G0, pushed.surjection)
        assert pushed.kernel == sorted(preimage(pushed.surjection, ["e"]), key=D.G0.elements.index)
        assert pushed.push_domain(["a", "ab"]) == ["a"]
        assert validate_cover(pushed.cover).valid

    def test_field_mismatch(self, kummer):
        """Test that cover and base must share a field."""
        other = DirectPresentation.from_json({"field": "F5", "n": 1, "I0": ["0"], "I1": ["y0 - x0"]})
        with pytest.raises(InvalidCover):
            GaloisCoverDesc(
                other, kummer.cover, kummer.G0, kummer.G1,
                kummer.action0, kummer.action1, kummer.hom_pi1, kummer.hom_sigma,
            )

    def test_base_rational(self):
        """Test that the catalog cover lives over Q."""
        assert load_catalog().covers["kummer"].base.field == Field.rationals()
