"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import itertools
import logging
from collections import namedtuple
from functools import lru_cache

from topos_lib.constants import DEFAULT_PRESHEAF_CAP
from topos_lib.util import cached_property

log = logging.getLogger(__name__)


# Contravariance convention used by every module: for a morphism phi: b -> a,
# a presheaf acts as X(phi): X(a) -> X(b). Morphisms, objects and elements are
# addressed by index; names and labels are only carried for display.


class MalformedCategory(Exception):
    """
    Category tables are out of range or not total on composable pairs
    """

    pass


class MalformedPresheaf(Exception):
    """
    Presheaf carriers or actions do not fit their category
    """

    pass


class NotNatural(Exception):
    """
    Components do not commute with the restriction maps
    """

    pass


class NotRestrictionStable(Exception):
    """
    A selection of elements is not closed under restriction
    """

    pass


class DiagramDoesNotCommute(Exception):
    """
    A diagram, cone or square fails to commute
    """

    pass


class NotAnEquivalence(Exception):
    """
    Relation is not reflexive, symmetric and transitive
    """

    pass


Violation = namedtuple("Violation", ["law", "where", "detail"])


class FinCategory(
    namedtuple("FinCategory", ["objects", "morphisms", "dom", "cod", "identity", "table"])
):
    """
    A finite category presented by its composition table.

    table[g][f] is the index of g.f when cod(f) == dom(g), None otherwise.
    """

    @cached_property
    def object_index(self):
        return {name: i for i, name in enumerate(self.objects)}

    @cached_property
    def morphism_index(self):
        return {name: i for i, name in enumerate(self.morphisms)}

    @cached_property
    def arrows_into(self):
        """
        @return per object, the morphisms with that codomain in index order
        """
        into = [[] for _ in self.objects]
        for phi, a in enumerate(self.cod):
            into[a].append(phi)
        return tuple(tuple(arrows) for arrows in into)

    @cached_property
    def homs(self):
        hom = {}
        for phi in range(len(self.morphisms)):
            hom.setdefault((self.dom[phi], self.cod[phi]), []).append(phi)
        return {key: tuple(value) for key, value in hom.items()}

    def hom(self, b, a):
        return self.homs.get((b, a), ())

    def compose(self, g, f):
        h = self.table[g][f]
        if h is None:
            raise MalformedCategory(
                "{} . {} is not composable".format(self.morphisms[g], self.morphisms[f])
            )
        return h

    def obj(self, name):
        try:
            return self.object_index[name]
        except KeyError:
            raise MalformedCategory("unknown object {!r}".format(name))

    def mor(self, name):
        try:
            return self.morphism_index[name]
        except KeyError:
            raise MalformedCategory("unknown morphism {!r}".format(name))

    def describe(self):
        return {
            "objects": list(self.objects),
            "morphisms": [
                {
                    "name": self.morphisms[phi],
                    "dom": self.objects[self.dom[phi]],
                    "cod": self.objects[self.cod[phi]],
                }
                for phi in range(len(self.morphisms))
            ],
        }


def _check_category_shape(c):
    n_obj = len(c.objects)
    n_mor = len(c.morphisms)
    if len(c.dom) != n_mor or len(c.cod) != n_mor:
        raise MalformedCategory("dom/cod tables must have one entry per morphism")
    for phi in range(n_mor):
        if not (0 <= c.dom[phi] < n_obj and 0 <= c.cod[phi] < n_obj):
            raise MalformedCategory(
                "morphism {} has an out of range endpoint".format(c.morphisms[phi])
            )
    if len(c.identity) != n_obj:
        raise MalformedCategory("identity table must have one entry per object")
    for a, ida in enumerate(c.identity):
        if not 0 <= ida < n_mor:
            raise MalformedCategory("identity of {} out of range".format(c.objects[a]))
    if len(c.table) != n_mor or any(len(row) != n_mor for row in c.table):
        raise MalformedCategory("composition table must be square")
    for g in range(n_mor):
        for f in range(n_mor):
            h = c.table[g][f]
            if c.cod[f] == c.dom[g]:
                if h is None:
                    raise MalformedCategory(
                        "no composite for {} . {}".format(c.morphisms[g], c.morphisms[f])
                    )
                if not 0 <= h < n_mor:
                    raise MalformedCategory(
                        "composite {} . {} out of range".format(
                            c.morphisms[g], c.morphisms[f]
                        )
                    )


def validate_category(c):
    """
    Checks typing, identity and associativity laws by exhaustion.

    @return list of Violation, empty iff c is a category
    @raise MalformedCategory on out of range indices or missing composites
    """
    _check_category_shape(c)
    name = c.morphisms
    violations = []
    for a, ida in enumerate(c.identity):
        if c.dom[ida] != a or c.cod[ida] != a:
            violations.append(
                Violation("identity", name[ida], "not an endomorphism of " + c.objects[a])
            )
    for g in range(len(name)):
        for f in range(len(name)):
            h = c.table[g][f]
            if h is None:
                continue
            if c.dom[h] != c.dom[f] or c.cod[h] != c.cod[g]:
                violations.append(
                    Violation(
                        "typing",
                        "{} . {}".format(name[g], name[f]),
                        "composite {} has the wrong endpoints".format(name[h]),
                    )
                )
    if violations:
        return violations
    for f in range(len(name)):
        if c.table[c.identity[c.cod[f]]][f] != f:
            violations.append(Violation("left-identity", name[f], "id . f != f"))
        if c.table[f][c.identity[c.dom[f]]] != f:
            violations.append(Violation("right-identity", name[f], "f . id != f"))
    for h in range(len(name)):
        for g in c.arrows_into[c.dom[h]]:
            hg = c.table[h][g]
            for f in c.arrows_into[c.dom[g]]:
                if c.table[h][c.table[g][f]] != c.table[hg][f]:
                    violations.append(
                        Violation(
                            "associativity",
                            "{} . {} . {}".format(name[h], name[g], name[f]),
                            "h.(g.f) != (h.g).f",
                        )
                    )
    return violations


def build_category(objects, arrows=(), composites=None):
    """
    Builds a category from its objects, its non-identity arrows given as
    (name, dom, cod) triples, and the composites of non-identity pairs.
    Identities are named id_<object> and compose implicitly.

    @raise MalformedCategory if an arrow is unknown or a composite is missing
    """
    composites = dict(composites or {})
    objects = tuple(objects)
    if len(set(objects)) != len(objects):
        raise MalformedCategory("duplicate object names")
    obj_index = {name: i for i, name in enumerate(objects)}
    names = ["id_{}".format(a) for a in objects]
    dom = list(range(len(objects)))
    cod = list(range(len(objects)))
    for name, src, tgt in arrows:
        if src not in obj_index or tgt not in obj_index:
            raise MalformedCategory("arrow {} has an unknown endpoint".format(name))
        names.append(name)
        dom.append(obj_index[src])
        cod.append(obj_index[tgt])
    if len(set(names)) != len(names):
        raise MalformedCategory("duplicate morphism names")
    mor_index = {name: i for i, name in enumerate(names)}
    identity = tuple(range(len(objects)))
    table = [[None] * len(names) for _ in names]
    for g in range(len(names)):
        for f in range(len(names)):
            if cod[f] != dom[g]:
                continue
            if g == identity[dom[g]]:
                table[g][f] = f
            elif f == identity[cod[f]]:
                table[g][f] = g
            else:
                key = (names[g], names[f])
                if key not in composites:
                    raise MalformedCategory("no composite for {} . {}".format(*key))
                h = composites.pop(key)
                if h not in mor_index:
                    raise MalformedCategory("composite {} is not an arrow".format(h))
                table[g][f] = mor_index[h]
    for g, f in composites:
        raise MalformedCategory("{} . {} is not a composable pair".format(g, f))
    return FinCategory(
        objects,
        tuple(names),
        tuple(dom),
        tuple(cod),
        identity,
        tuple(tuple(row) for row in table),
    )


def terminal_category():
    return build_category(["pt"])


def poset_category(elements, relations=()):
    """
    Thin category of the preorder generated by (a, b) pairs meaning a <= b.
    The arrow a -> b is named a_b.
    """
    elements = tuple(elements)
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    below = [[i == j for j in range(n)] for i in range(n)]
    for a, b in relations:
        if a not in index or b not in index:
            raise MalformedCategory("relation {} <= {} names an unknown element".format(a, b))
        below[index[a]][index[b]] = True
    for k in range(n):
        for i in range(n):
            if below[i][k]:
                for j in range(n):
                    if below[k][j]:
                        below[i][j] = True
    arrows = [
        ("{}_{}".format(a, b), a, b)
        for i, a in enumerate(elements)
        for j, b in enumerate(elements)
        if i != j and below[i][j]
    ]
    between = {(src, tgt): name for name, src, tgt in arrows}
    composites = {}
    for g, mid, c in arrows:
        for f, a, mid2 in arrows:
            if mid2 == mid:
                composites[(g, f)] = "id_{}".format(a) if a == c else between[(a, c)]
    return build_category(elements, arrows, composites)


def monoid_category(elements, products):
    """
    One-object category of a finite monoid. elements are the non-unit
    elements; products maps (x, y) to x.y. The unit is id_pt.
    """
    unit = "id_pt"
    arrows = [(name, "pt", "pt") for name in elements]
    composites = {}
    for (x, y), z in products.items():
        composites[(x, y)] = unit if z in ("1", unit) else z
    return build_category(["pt"], arrows, composites)


class Presheaf(namedtuple("Presheaf", ["category", "elements", "action"])):
    """
    A presheaf of finite sets. elements[a] is the tuple of labels of X(a);
    action[phi] maps element indices of X(cod phi) to X(dom phi).
    """

    @cached_property
    def _index(self):
        return tuple({label: i for i, label in enumerate(labels)} for labels in self.elements)

    def index(self, a, label):
        return self._index[a][label]

    def size(self, a):
        return len(self.elements[a])

    @cached_property
    def sizes(self):
        return tuple(len(labels) for labels in self.elements)

    def restrict(self, phi, i):
        return self.action[phi][i]

    def is_empty(self):
        return not any(self.sizes)

    def describe(self):
        c = self.category
        return {
            "carriers": {c.objects[a]: [_render(x) for x in labels] for a, labels in enumerate(self.elements)},
            "sizes": {c.objects[a]: n for a, n in enumerate(self.sizes)},
        }

    def validate(self):
        """
        @return list of Violation for identity and functoriality failures
        """
        c = self.category
        violations = []
        for a, ida in enumerate(c.identity):
            if tuple(self.action[ida]) != tuple(range(self.size(a))):
                violations.append(Violation("identity", c.morphisms[ida], "X(id) != id"))
        for phi in range(len(c.morphisms)):
            b = c.dom[phi]
            for psi in c.arrows_into[b]:
                composite = c.table[phi][psi]
                for i in range(self.size(c.cod[phi])):
                    if self.action[composite][i] != self.action[psi][self.action[phi][i]]:
                        violations.append(
                            Violation(
                                "functoriality",
                                "{} . {}".format(c.morphisms[phi], c.morphisms[psi]),
                                "X(phi.psi) != X(psi).X(phi) at {}".format(
                                    _render(self.elements[c.cod[phi]][i])
                                ),
                            )
                        )
                        break
        return violations


def _render(label):
    if isinstance(label, (tuple, list)):
        return [_render(x) for x in label]
    if isinstance(label, frozenset):
        return sorted((_render(x) for x in label), key=repr)
    return label


def _check_presheaf_shape(c, elements, action):
    if len(elements) != len(c.objects):
        raise MalformedPresheaf("one carrier per object is required")
    if len(action) != len(c.morphisms):
        raise MalformedPresheaf("one action per morphism is required")
    for phi, table in enumerate(action):
        src, tgt = c.cod[phi], c.dom[phi]
        if len(table) != len(elements[src]):
            raise MalformedPresheaf(
                "action of {} must be total on X({})".format(c.morphisms[phi], c.objects[src])
            )
        for j in table:
            if not 0 <= j < len(elements[tgt]):
                raise MalformedPresheaf(
                    "action of {} leaves X({})".format(c.morphisms[phi], c.objects[tgt])
                )


def make_presheaf(category, elements, action):
    """
    Validated constructor from index tables.

    @raise MalformedPresheaf on shape errors or functoriality violations
    """
    elements = tuple(tuple(labels) for labels in elements)
    action = tuple(tuple(table) for table in action)
    _check_presheaf_shape(category, elements, action)
    x = Presheaf(category, elements, action)
    violations = x.validate()
    if violations:
        raise MalformedPresheaf("; ".join("{}: {}".format(v.where, v.detail) for v in violations))
    return x


def presheaf_from_tables(category, carriers, actions=None):
    """
    Builds a presheaf from name-keyed tables: carriers maps object names to
    element labels, actions maps morphism names to {label: label} dicts.
    Identity actions may be omitted.
    """
    actions = actions or {}
    c = category
    elements = []
    for a in c.objects:
        labels = tuple(carriers.get(a, ()))
        if len(set(labels)) != len(labels):
            raise MalformedPresheaf("duplicate elements in X({})".format(a))
        elements.append(labels)
    for name in actions:
        c.mor(name)
    index = [{label: i for i, label in enumerate(labels)} for labels in elements]
    action = []
    for phi, name in enumerate(c.morphisms):
        src, tgt = c.cod[phi], c.dom[phi]
        if phi in c.identity and name not in actions:
            action.append(tuple(range(len(elements[src]))))
            continue
        table = actions.get(name)
        if table is None:
            if not elements[src]:
                action.append(())
                continue
            raise MalformedPresheaf("no action given for {}".format(name))
        row = []
        for label in elements[src]:
            if label not in table:
                raise MalformedPresheaf("{} is undefined on {}".format(name, label))
            image = table[label]
            if image not in index[tgt]:
                raise MalformedPresheaf(
                    "{} sends {} outside X({})".format(name, label, c.objects[tgt])
                )
            row.append(index[tgt][image])
        action.append(tuple(row))
    return make_presheaf(c, elements, action)


@lru_cache(maxsize=None)
def yoneda(category, a):
    """
    Representable presheaf y(a): y(a)(b) = hom(b, a) with elements labelled by
    morphism index, acting by precomposition.
    """
    c = category
    elements = tuple(c.hom(b, a) for b in range(len(c.objects)))
    position = [{phi: i for i, phi in enumerate(hom)} for hom in elements]
    action = []
    for phi in range(len(c.morphisms)):
        src, tgt = c.cod[phi], c.dom[phi]
        action.append(tuple(position[tgt][c.table[psi][phi]] for psi in elements[src]))
    return Presheaf(c, elements, tuple(action))


def constant_presheaf(category, labels):
    labels = tuple(labels)
    c = category
    return Presheaf(
        c,
        tuple(labels for _ in c.objects),
        tuple(tuple(range(len(labels))) for _ in c.morphisms),
    )


def terminal_presheaf(category):
    return product(category=category)


def initial_presheaf(category):
    return constant_presheaf(category, ())


@lru_cache(maxsize=None)
def product(*factors, category=None):
    """
    Pointwise product. Elements are tuples of factor element indices, in
    lexicographic order; the empty product is the terminal presheaf.
    """
    if factors:
        category = factors[0].category
    if category is None:
        raise MalformedPresheaf("empty product needs a category")
    for x in factors:
        if x.category != category:
            raise MalformedPresheaf("factors live over different categories")
    c = category
    elements = tuple(
        tuple(itertools.product(*(range(x.size(a)) for x in factors)))
        for a in range(len(c.objects))
    )
    index = [{t: i for i, t in enumerate(labels)} for labels in elements]
    action = []
    for phi in range(len(c.morphisms)):
        src, tgt = c.cod[phi], c.dom[phi]
        action.append(
            tuple(
                index[tgt][tuple(x.action[phi][t[k]] for k, x in enumerate(factors))]
                for t in elements[src]
            )
        )
    return Presheaf(c, elements, tuple(action))


class NatTrans(namedtuple("NatTrans", ["source", "target", "components"])):
    """
    A natural transformation; components[a][i] is the image of the i-th
    element of source(a).
    """

    def apply(self, a, i):
        return self.components[a][i]

    def is_mono(self):
        return all(len(set(comp)) == len(comp) for comp in self.components)

    def is_epi(self):
        return all(
            len(set(comp)) == self.target.size(a) for a, comp in enumerate(self.components)
        )

    def is_iso(self):
        return self.is_mono() and self.is_epi()

    def fibre_sizes(self, a):
        counts = [0] * self.target.size(a)
        for y in self.components[a]:
            counts[y] += 1
        return counts

    def naturality_failures(self):
        c = self.source.category
        failures = []
        for phi in range(len(c.morphisms)):
            src, tgt = c.cod[phi], c.dom[phi]
            for i in range(self.source.size(src)):
                left = self.target.action[phi][self.components[src][i]]
                right = self.components[tgt][self.source.action[phi][i]]
                if left != right:
                    failures.append((c.morphisms[phi], self.source.elements[src][i]))
        return failures

    def is_natural(self):
        return not self.naturality_failures()

    def inverse(self):
        if not self.is_iso():
            raise NotNatural("map is not invertible")
        comps = []
        for comp in self.components:
            inv = [0] * len(comp)
            for i, y in enumerate(comp):
                inv[y] = i
            comps.append(tuple(inv))
        return NatTrans(self.target, self.source, tuple(comps))

    def describe(self):
        c = self.source.category
        return {
            c.objects[a]: {
                repr(_render(self.source.elements[a][i])): _render(self.target.elements[a][y])
                for i, y in enumerate(comp)
            }
            for a, comp in enumerate(self.components)
        }


def make_nat_trans(source, target, components):
    """
    @raise NotNatural if the components are out of range or not natural
    """
    components = tuple(tuple(comp) for comp in components)
    if source.category != target.category:
        raise NotNatural("source and target live over different categories")
    for a, comp in enumerate(components):
        if len(comp) != source.size(a) or any(not 0 <= y < target.size(a) for y in comp):
            raise NotNatural("component at {} is not a function".format(source.category.objects[a]))
    f = NatTrans(source, target, components)
    failures = f.naturality_failures()
    if failures:
        raise NotNatural("not natural along {} at {}".format(*failures[0]))
    return f


def nat_trans_from_tables(source, target, tables):
    """
    Builds a map from {object name: {label: label}} tables.
    """
    c = source.category
    components = []
    for a, name in enumerate(c.objects):
        table = tables.get(name, {})
        comp = []
        for label in source.elements[a]:
            if label not in table:
                raise NotNatural("map is undefined on {} at {}".format(label, name))
            try:
                comp.append(target.index(a, table[label]))
            except KeyError:
                raise NotNatural("{} is not an element of the target at {}".format(table[label], name))
        components.append(comp)
    return make_nat_trans(source, target, components)


def identity_map(x):
    return NatTrans(x, x, tuple(tuple(range(x.size(a))) for a in range(len(x.elements))))


def compose(g, f):
    """
    @return g . f
    """
    if f.target != g.source:
        raise NotNatural("maps are not composable")
    return NatTrans(
        f.source,
        g.target,
        tuple(
            tuple(gc[y] for y in fc) for fc, gc in zip(f.components, g.components)
        ),
    )


def to_terminal(x):
    one = terminal_presheaf(x.category)
    return NatTrans(x, one, tuple((0,) * x.size(a) for a in range(len(x.elements))))


def from_initial(x):
    zero = initial_presheaf(x.category)
    return NatTrans(zero, x, tuple(() for _ in x.elements))


def projection(factors, k):
    """
    k-th projection out of product(*factors)
    """
    p = product(*factors)
    return NatTrans(p, factors[k], tuple(tuple(t[k] for t in labels) for labels in p.elements))


def pairing(maps, source=None):
    """
    Tupling <f_1, ..., f_n>: source -> product of the targets
    """
    if maps:
        source = maps[0].source
    targets = tuple(f.target for f in maps)
    p = product(*targets, category=source.category)
    comps = []
    for a in range(len(source.elements)):
        comps.append(
            tuple(
                p.index(a, tuple(f.components[a][i] for f in maps))
                for i in range(source.size(a))
            )
        )
    return NatTrans(source, p, tuple(comps))


def product_map(*maps):
    """
    f_1 x ... x f_n between the products of sources and targets
    """
    sources = tuple(f.source for f in maps)
    src = product(*sources)
    tgt = product(*(f.target for f in maps))
    comps = []
    for a, labels in enumerate(src.elements):
        comps.append(
            tuple(
                tgt.index(a, tuple(f.components[a][t[k]] for k, f in enumerate(maps)))
                for t in labels
            )
        )
    return NatTrans(src, tgt, tuple(comps))


class Subpresheaf(namedtuple("Subpresheaf", ["parent", "selection"])):
    """
    A restriction-stable selection of elements; selection[a] is a frozenset
    of element indices of parent(a).
    """

    def contains(self, a, i):
        return i in self.selection[a]

    def is_restriction_stable(self):
        return not self.stability_failures()

    def stability_failures(self):
        x = self.parent
        c = x.category
        failures = []
        for phi in range(len(c.morphisms)):
            src, tgt = c.cod[phi], c.dom[phi]
            for i in self.selection[src]:
                if x.action[phi][i] not in self.selection[tgt]:
                    failures.append((c.morphisms[phi], x.elements[src][i]))
        return failures

    @cached_property
    def positions(self):
        return tuple({i: k for k, i in enumerate(sorted(sel))} for sel in self.selection)

    def position(self, a, i):
        return self.positions[a][i]

    @cached_property
    def as_presheaf(self):
        """
        The subobject reified as a presheaf, elements in parent index order.
        """
        x = self.parent
        c = x.category
        elements = tuple(
            tuple(x.elements[a][i] for i in sorted(sel)) for a, sel in enumerate(self.selection)
        )
        action = []
        for phi in range(len(c.morphisms)):
            src, tgt = c.cod[phi], c.dom[phi]
            action.append(
                tuple(self.positions[tgt][x.action[phi][i]] for i in sorted(self.selection[src]))
            )
        return Presheaf(c, elements, tuple(action))

    @cached_property
    def inclusion(self):
        return NatTrans(
            self.as_presheaf,
            self.parent,
            tuple(tuple(sorted(sel)) for sel in self.selection),
        )

    def sizes(self):
        return tuple(len(sel) for sel in self.selection)

    def describe(self):
        x = self.parent
        c = x.category
        return {
            c.objects[a]: [_render(x.elements[a][i]) for i in sorted(sel)]
            for a, sel in enumerate(self.selection)
        }


def make_subpresheaf(parent, selection):
    """
    @raise NotRestrictionStable naming the first element that escapes
    """
    selection = tuple(frozenset(sel) for sel in selection)
    if len(selection) != len(parent.elements):
        raise MalformedPresheaf("one selection per object is required")
    s = Subpresheaf(parent, selection)
    failures = s.stability_failures()
    if failures:
        raise NotRestrictionStable("restricting {1} along {0} leaves the selection".format(*failures[0]))
    return s


def subpresheaf_from_labels(parent, labels_by_object):
    c = parent.category
    selection = []
    for a, name in enumerate(c.objects):
        labels = labels_by_object.get(name, ())
        try:
            selection.append(frozenset(parent.index(a, label) for label in labels))
        except KeyError as e:
            raise MalformedPresheaf("{} is not an element at {}".format(e.args[0], name))
    return make_subpresheaf(parent, selection)


def image_factorization(f):
    """
    @return (epi onto the image, image as a Subpresheaf of the target)
    """
    image = Subpresheaf(f.target, tuple(frozenset(comp) for comp in f.components))
    epi = NatTrans(
        f.source,
        image.as_presheaf,
        tuple(
            tuple(image.positions[a][y] for y in comp) for a, comp in enumerate(f.components)
        ),
    )
    return epi, image


class PresheafDiagram(namedtuple("PresheafDiagram", ["presheaves", "arrows", "equations"])):
    """
    Finite diagram. arrows are (source, target, NatTrans) over shape object
    indices; equations are pairs of paths, each a sequence of arrow indices
    applied first to last.
    """

    def path(self, arrows):
        f = None
        for k in arrows:
            f = self.arrows[k][2] if f is None else compose(self.arrows[k][2], f)
        return f

    def check(self):
        for k, (i, j, f) in enumerate(self.arrows):
            if f.source != self.presheaves[i] or f.target != self.presheaves[j]:
                raise MalformedPresheaf("arrow {} does not match its endpoints".format(k))
        for left, right in self.equations:
            f, g = self.path(left), self.path(right)
            if f is None or g is None or f.source != g.source or f.target != g.target:
                raise DiagramDoesNotCommute("equation {} = {} is ill-typed".format(left, right))
            if f.components != g.components:
                raise DiagramDoesNotCommute("paths {} and {} differ".format(left, right))


LimitResult = namedtuple("LimitResult", ["apex", "projections"])
ColimitResult = namedtuple("ColimitResult", ["apex", "injections"])
Quotient = namedtuple("Quotient", ["presheaf", "projection"])


def limit(d, category=None):
    """
    Pointwise limit. Elements are tuples holding one element index per shape
    object, lexicographically ordered.
    """
    d.check()
    if d.presheaves:
        category = d.presheaves[0].category
    base = product(*d.presheaves, category=category)
    keep = []
    for a, labels in enumerate(base.elements):
        keep.append(
            frozenset(
                k
                for k, t in enumerate(labels)
                if all(f.components[a][t[i]] == t[j] for i, j, f in d.arrows)
            )
        )
    apex = Subpresheaf(base, tuple(keep)).as_presheaf
    projections = tuple(
        NatTrans(apex, x, tuple(tuple(t[k] for t in labels) for labels in apex.elements))
        for k, x in enumerate(d.presheaves)
    )
    return LimitResult(apex, projections)


def limit_mediator(lim, source, legs):
    """
    The unique map from a cone into the limit.

    @raise DiagramDoesNotCommute if the legs do not form a cone
    """
    comps = []
    for a in range(len(source.elements)):
        row = []
        for i in range(source.size(a)):
            t = tuple(leg.components[a][i] for leg in legs)
            try:
                row.append(lim.apex.index(a, t))
            except KeyError:
                raise DiagramDoesNotCommute("legs do not form a cone")
        comps.append(tuple(row))
    return NatTrans(source, lim.apex, tuple(comps))


def binary_product(x, y):
    p = product(x, y)
    return LimitResult(p, (projection((x, y), 0), projection((x, y), 1)))


def pullback(f, g):
    """
    Pullback of the cospan f: X -> A <- Y: g. Projections to X, Y and A.
    """
    if f.target != g.target:
        raise DiagramDoesNotCommute("maps do not share a codomain")
    d = PresheafDiagram((f.source, g.source, f.target), ((0, 2, f), (1, 2, g)), ())
    return limit(d)


def equalizer(f, g):
    if f.source != g.source or f.target != g.target:
        raise DiagramDoesNotCommute("maps are not parallel")
    return limit(PresheafDiagram((f.source, f.target), ((0, 1, f), (0, 1, g)), ()))


def _find(parent, key):
    while parent[key] != key:
        parent[key] = parent[parent[key]]
        key = parent[key]
    return key


def _union(parent, u, v):
    ru, rv = _find(parent, u), _find(parent, v)
    if ru != rv:
        if rv < ru:
            ru, rv = rv, ru
        parent[rv] = ru


def colimit(d, category=None):
    """
    Pointwise colimit. Elements are the least (shape object, element index)
    pair of each class of the generated equivalence relation.
    """
    d.check()
    if d.presheaves:
        category = d.presheaves[0].category
    c = category
    reps = []
    for a in range(len(c.objects)):
        parent = {(k, i): (k, i) for k, x in enumerate(d.presheaves) for i in range(x.size(a))}
        for i, j, f in d.arrows:
            for e in range(d.presheaves[i].size(a)):
                _union(parent, (i, e), (j, f.components[a][e]))
        reps.append({key: _find(parent, key) for key in parent})
    elements = tuple(tuple(sorted(set(rep.values()))) for rep in reps)
    index = [{label: n for n, label in enumerate(labels)} for labels in elements]
    action = []
    for phi in range(len(c.morphisms)):
        src, tgt = c.cod[phi], c.dom[phi]
        action.append(
            tuple(
                index[tgt][reps[tgt][(k, d.presheaves[k].action[phi][i])]]
                for k, i in elements[src]
            )
        )
    apex = Presheaf(c, elements, tuple(action))
    injections = tuple(
        NatTrans(
            x,
            apex,
            tuple(
                tuple(index[a][reps[a][(k, i)]] for i in range(x.size(a)))
                for a in range(len(c.objects))
            ),
        )
        for k, x in enumerate(d.presheaves)
    )
    return ColimitResult(apex, injections)


def colimit_mediator(col, target, legs):
    """
    The unique map out of the colimit to a cocone.

    @raise DiagramDoesNotCommute if the legs do not form a cocone
    """
    comps = []
    for a, labels in enumerate(col.apex.elements):
        row = [None] * len(labels)
        for leg, inj in zip(legs, col.injections):
            for i, n in enumerate(inj.components[a]):
                y = leg.components[a][i]
                if row[n] is None:
                    row[n] = y
                elif row[n] != y:
                    raise DiagramDoesNotCommute("legs do not form a cocone")
        comps.append(tuple(row))
    return NatTrans(col.apex, target, tuple(comps))


@lru_cache(maxsize=None)
def coproduct(*summands, category=None):
    return colimit(PresheafDiagram(tuple(summands), (), ()), category=category)


def copair(col, f, g):
    """
    [f, g]: X + Y -> A out of a binary coproduct
    """
    return colimit_mediator(col, f.target, (f, g))


def coproduct_map(f, g):
    """
    f + g: X + Y -> A + B
    """
    src = coproduct(f.source, g.source)
    tgt = coproduct(f.target, g.target)
    return colimit_mediator(
        src,
        tgt.apex,
        (compose(tgt.injections[0], f), compose(tgt.injections[1], g)),
    )


def coequalizer(f, g):
    if f.source != g.source or f.target != g.target:
        raise DiagramDoesNotCommute("maps are not parallel")
    col = colimit(PresheafDiagram((f.source, f.target), ((0, 1, f), (0, 1, g)), ()))
    return ColimitResult(col.apex, (col.injections[1],))


def quotient_by_equivalence(x, r):
    """
    Pointwise quotient of x by an equivalence relation r on x. Elements are
    the tuples of labels in each class, classes ordered by least member.

    @raise NotAnEquivalence with the failing pair
    """
    xx = product(x, x)
    if r.parent != xx:
        raise NotAnEquivalence("relation must be a subobject of X x X")
    c = x.category
    classes = []
    for a in range(len(c.objects)):
        n = x.size(a)
        related = [set() for _ in range(n)]
        for k in r.selection[a]:
            i, j = xx.elements[a][k]
            related[i].add(j)
        for i in range(n):
            if i not in related[i]:
                raise NotAnEquivalence("not reflexive at {}".format(x.elements[a][i]))
            for j in related[i]:
                if i not in related[j]:
                    raise NotAnEquivalence(
                        "not symmetric on ({}, {})".format(x.elements[a][i], x.elements[a][j])
                    )
                if not related[j] <= related[i]:
                    m = min(related[j] - related[i])
                    raise NotAnEquivalence(
                        "not transitive on ({}, {}, {})".format(
                            x.elements[a][i], x.elements[a][j], x.elements[a][m]
                        )
                    )
        seen = {}
        for i in range(n):
            seen.setdefault(min(related[i]), tuple(sorted(related[i])))
        classes.append([seen[key] for key in sorted(seen)])
    cls_of = [
        {i: n for n, cls in enumerate(per) for i in cls} for per in classes
    ]
    elements = tuple(
        tuple(tuple(x.elements[a][i] for i in cls) for cls in per)
        for a, per in enumerate(classes)
    )
    action = []
    for phi in range(len(c.morphisms)):
        src, tgt = c.cod[phi], c.dom[phi]
        action.append(
            tuple(cls_of[tgt][x.action[phi][cls[0]]] for cls in classes[src])
        )
    q = Presheaf(c, elements, tuple(action))
    proj = NatTrans(
        x,
        q,
        tuple(tuple(cls_of[a][i] for i in range(x.size(a))) for a in range(len(c.objects))),
    )
    return Quotient(q, proj)


def _restriction_slots(source):
    c = source.category
    order = sorted(range(len(c.objects)), key=lambda a: (-len(c.arrows_into[a]), a))
    return [(a, i) for a in order for i in range(source.size(a))]


def iter_nat_trans(source, target, fixed=None):
    """
    Enumerates Nat(source, target) by backtracking. Binding an element forces
    the images of all its restrictions, so the search only branches on
    elements not reached from an earlier choice.

    @param fixed: optional {(object, element index): target index} pins
    """
    c = source.category
    if target.category != c:
        return
    into = c.arrows_into
    assign = {}

    def bind(a, i, y, trail):
        stack = [(a, i, y)]
        while stack:
            a, i, y = stack.pop()
            known = assign.get((a, i))
            if known is not None:
                if known != y:
                    return False
                continue
            assign[(a, i)] = y
            trail.append((a, i))
            for phi in into[a]:
                stack.append((c.dom[phi], source.action[phi][i], target.action[phi][y]))
        return True

    for (a, i), y in sorted((fixed or {}).items()):
        if not 0 <= y < target.size(a) or not bind(a, i, y, []):
            return
    slots = _restriction_slots(source)
    n_obj = len(c.objects)

    def search(k):
        while k < len(slots) and slots[k] in assign:
            k += 1
        if k == len(slots):
            yield NatTrans(
                source,
                target,
                tuple(
                    tuple(assign[(a, i)] for i in range(source.size(a))) for a in range(n_obj)
                ),
            )
            return
        a, i = slots[k]
        for y in range(target.size(a)):
            trail = []
            if bind(a, i, y, trail):
                for f in search(k + 1):
                    yield f
            for key in trail:
                del assign[key]

    for f in search(0):
        yield f


def count_nat_trans(source, target):
    return sum(1 for _ in iter_nat_trans(source, target))


def find_isomorphism(x, y, fixed=None):
    """
    @return an isomorphism x -> y extending the pins, or None
    """
    if x.category != y.category or x.sizes != y.sizes:
        return None
    for f in iter_nat_trans(x, y, fixed):
        if f.is_iso():
            return f
    return None


def is_isomorphic(x, y):
    return find_isomorphism(x, y) is not None


def iter_presheaves(category, max_size, cap=DEFAULT_PRESHEAF_CAP):
    """
    Enumerates every presheaf whose carriers have at most max_size elements,
    labelled 0..n-1. Yields at most cap presheaves.
    """
    c = category
    n_obj = len(c.objects)
    produced = 0
    non_identity = [phi for phi in range(len(c.morphisms)) if phi not in c.identity]
    for sizes in itertools.product(range(max_size + 1), repeat=n_obj):
        elements = tuple(tuple(range(n)) for n in sizes)
        choices = [
            itertools.product(range(sizes[c.dom[phi]]), repeat=sizes[c.cod[phi]])
            for phi in non_identity
        ]
        for tables in itertools.product(*choices):
            action = [None] * len(c.morphisms)
            for a, ida in enumerate(c.identity):
                action[ida] = tuple(range(sizes[a]))
            for phi, table in zip(non_identity, tables):
                action[phi] = tuple(table)
            x = Presheaf(c, elements, tuple(action))
            if x.validate():
                continue
            produced += 1
            if produced > cap:
                log.warning("presheaf enumeration stopped at %d presheaves", cap)
                return
            yield x


def up_to_isomorphism(presheaves):
    """
    Keeps the first representative of every isomorphism class.
    """
    kept = []
    for x in presheaves:
        if not any(find_isomorphism(y, x) is not None for y in kept if y.sizes == x.sizes):
            kept.append(x)
    return kept


def exponential(x, y):
    """
    Presheaf exponential: Y^X(a) = Nat(y(a) x X, Y). Elements are the
    component tables of those transformations.
    """
    c = x.category
    n_obj = len(c.objects)
    stages = []
    for a in range(n_obj):
        ya = yoneda(c, a)
        stages.append((ya, product(ya, x), tuple(f.components for f in iter_nat_trans(product(ya, x), y))))
    elements = tuple(maps for _, _, maps in stages)
    index = [{m: i for i, m in enumerate(maps)} for maps in elements]
    action = []
    for phi in range(len(c.morphisms)):
        src, tgt = c.cod[phi], c.dom[phi]
        ya_src, p_src, _ = stages[src]
        ya_tgt, p_tgt, _ = stages[tgt]
        row = []
        for comps in elements[src]:
            restricted = []
            for d in range(n_obj):
                values = []
                for k_psi, ix in p_tgt.elements[d]:
                    psi = ya_tgt.elements[d][k_psi]
                    composite = c.table[phi][psi]
                    values.append(
                        comps[d][p_src.index(d, (ya_src.index(d, composite), ix))]
                    )
                restricted.append(tuple(values))
            row.append(index[tgt][tuple(restricted)])
        action.append(tuple(row))
    return Presheaf(c, elements, tuple(action))


class Square(namedtuple("Square", ["top", "left", "right", "bottom"])):
    """
    Commuting square  Y --top--> X
                      |          |
                     left      right
                      v          v
                      B --bottom-> A
    """

    pass


def check_square(square):
    """
    @raise DiagramDoesNotCommute unless right.top == bottom.left
    """
    top, left, right, bottom = square
    if top.target != right.source or left.target != bottom.source or right.target != bottom.target:
        raise DiagramDoesNotCommute("square is ill-typed")
    if top.source != left.source:
        raise DiagramDoesNotCommute("square has two apexes")
    if compose(right, top).components != compose(bottom, left).components:
        raise DiagramDoesNotCommute("square does not commute")


def square_comparison(square):
    """
    Canonical map from the apex of a commuting square into B x_A X.
    """
    check_square(square)
    top, left, right, bottom = square
    pb = pullback(bottom, right)
    return limit_mediator(pb, top.source, (left, top, compose(bottom, left)))


def is_quasi_pullback(square):
    return square_comparison(square).is_epi()
