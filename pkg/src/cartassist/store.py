"""Store map, shelves, marker bindings and the product catalog.

A whole store lives in one human-editable text document with an ASCII map
block followed by plain tables:

    [map]
    ############
    #.A...B...C#
    #..........#
    ############

    [aisles]
    4 8

    [shelves]
    S1  A  N  Dairy

    [markers]
    7  S1  0.15

    [products]
    P01  S1  1  1  228  Milk | MooCo | 1L

Map characters: `.` is walkable floor, `#` is blocked, and a letter marks a
shelf cell referenced from the [shelves] table.  A shelf row is
`shelf_id  letter  facing  section name`; `facing` is the direction from the
approach cell toward the shelf cell, so `N` puts the shopper on the south
side looking north at the shelf.  Marker rows are `marker_id shelf_id size_m`
and product rows are `product_id shelf_id row col price name | brand | variety`.
Blank lines and full-line `#` comments are ignored outside the map block.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ParseError, UnknownMarker, UnknownProduct, ValidationError
from .geometry import Cell, Direction, opposite, step_cell

MARKER_ID_MAX = 999  # 5x5 fiducial dictionaries commonly hold up to 1000 ids


class CellKind(Enum):
    WALKABLE = "walkable"
    SHELF = "shelf"
    BLOCKED = "blocked"


@dataclass(frozen=True)
class StoreMap:
    width: int
    height: int
    cells: tuple[CellKind, ...]  # row-major
    aisle_columns: tuple[int, ...] = ()

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def kind_at(self, cell: Cell) -> CellKind:
        x, y = cell
        return self.cells[y * self.width + x]

    def is_walkable(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and self.kind_at(cell) is CellKind.WALKABLE


@dataclass(frozen=True)
class ShelfRecord:
    shelf_id: str
    section_name: str
    glyph: str  # map letter tying the record to its shelf cell
    shelf_cell: Cell
    facing: Direction  # direction from approach_cell toward shelf_cell

    @property
    def approach_cell(self) -> Cell:
        return step_cell(self.shelf_cell, opposite(self.facing))


@dataclass(frozen=True)
class MarkerBinding:
    marker_id: int
    shelf_id: str
    physical_size_m: float


@dataclass(frozen=True)
class ProductRecord:
    product_id: str
    name: str
    brand: str
    variety: str
    shelf_id: str
    row_from_top: int
    col_from_left: int
    price: int  # minor currency units


@dataclass(frozen=True)
class ProductTarget:
    approach_cell: Cell
    facing: Direction
    shelf_id: str
    row_from_top: int
    col_from_left: int
    price: int


@dataclass(frozen=True)
class Store:
    map: StoreMap
    shelves: dict[str, ShelfRecord]
    markers: dict[int, MarkerBinding]
    products: dict[str, ProductRecord]

    def section_of_marker(self, marker_id: int) -> str:
        binding = self.markers.get(marker_id)
        if binding is None:
            raise UnknownMarker(f"no shelf bound to marker {marker_id}")
        return self.shelves[binding.shelf_id].section_name

    def product_target(self, product_id: str) -> ProductTarget:
        product = self.products.get(product_id)
        if product is None:
            raise UnknownProduct(f"no product with id {product_id!r}")
        shelf = self.shelves[product.shelf_id]
        return ProductTarget(
            approach_cell=shelf.approach_cell,
            facing=shelf.facing,
            shelf_id=shelf.shelf_id,
            row_from_top=product.row_from_top,
            col_from_left=product.col_from_left,
            price=product.price,
        )

    def shelf_by_section(self, section_text: str) -> ShelfRecord | None:
        """Best-effort section lookup: exact, then substring either way."""
        wanted = " ".join(section_text.lower().split())
        shelves = sorted(self.shelves.values(), key=lambda s: s.shelf_id)
        for shelf in shelves:
            if shelf.section_name.lower() == wanted:
                return shelf
        for shelf in shelves:
            name = shelf.section_name.lower()
            if name in wanted or wanted in name:
                return shelf
        return None


_SECTION_HEADERS = ("[map]", "[aisles]", "[shelves]", "[markers]", "[products]")


def load_store(document: str) -> Store:
    """Parse and validate a store document.

    Raises ParseError at the first structural problem and ValidationError
    with every cross-reference or invariant violation collected.
    """
    sections = _split_sections(document)
    if "map" not in sections:
        raise ParseError(1, "missing [map] section")

    grid_rows, first_map_line = sections["map"]
    if not grid_rows:
        raise ParseError(first_map_line, "[map] section has no rows")
    width = len(grid_rows[0][0])
    cells: list[CellKind] = []
    shelf_glyph_cells: dict[str, Cell] = {}
    for y, (row, line_no) in enumerate(grid_rows):
        if len(row) != width:
            raise ParseError(line_no, f"map row has width {len(row)}, expected {width}")
        for x, ch in enumerate(row):
            if ch == ".":
                cells.append(CellKind.WALKABLE)
            elif ch == "#":
                cells.append(CellKind.BLOCKED)
            elif ch.isalpha():
                if ch in shelf_glyph_cells:
                    raise ParseError(line_no, f"shelf letter {ch!r} appears more than once")
                shelf_glyph_cells[ch] = (x, y)
                cells.append(CellKind.SHELF)
            else:
                raise ParseError(line_no, f"unknown map character {ch!r}")

    aisle_columns: list[int] = []
    if "aisles" in sections:
        for row, line_no in sections["aisles"][0]:
            for token in row.split():
                try:
                    aisle_columns.append(int(token))
                except ValueError:
                    raise ParseError(line_no, f"aisle column {token!r} is not an integer") from None

    shelves: dict[str, ShelfRecord] = {}
    problems: list[str] = []
    if "shelves" in sections:
        for row, line_no in sections["shelves"][0]:
            parts = row.split(None, 3)
            if len(parts) != 4:
                raise ParseError(line_no, "shelf row needs: shelf_id letter facing section name")
            shelf_id, glyph, facing_s, section = parts
            try:
                facing = Direction(facing_s)
            except ValueError:
                raise ParseError(line_no, f"facing must be one of N E S W, got {facing_s!r}") from None
            if shelf_id in shelves:
                problems.append(f"duplicate shelf id {shelf_id!r}")
                continue
            cell = shelf_glyph_cells.get(glyph)
            if cell is None:
                problems.append(f"shelf {shelf_id!r} references letter {glyph!r} not present in the map")
                continue
            shelves[shelf_id] = ShelfRecord(shelf_id, section.strip(), glyph, cell, facing)

    markers: dict[int, MarkerBinding] = {}
    if "markers" in sections:
        for row, line_no in sections["markers"][0]:
            parts = row.split()
            if len(parts) != 3:
                raise ParseError(line_no, "marker row needs: marker_id shelf_id size_m")
            try:
                marker_id = int(parts[0])
                size = float(parts[2])
            except ValueError:
                raise ParseError(line_no, f"bad marker row {row!r}") from None
            if marker_id in markers:
                problems.append(f"duplicate marker id {marker_id}")
                continue
            if not 0 <= marker_id <= MARKER_ID_MAX:
                problems.append(f"marker id {marker_id} outside 0..{MARKER_ID_MAX}")
            if parts[1] not in shelves:
                problems.append(f"marker {marker_id} references unknown shelf {parts[1]!r}")
            if size <= 0:
                problems.append(f"marker {marker_id} physical size must be positive")
            markers[marker_id] = MarkerBinding(marker_id, parts[1], size)

    products: dict[str, ProductRecord] = {}
    if "products" in sections:
        for row, line_no in sections["products"][0]:
            parts = row.split(None, 5)
            if len(parts) != 6:
                raise ParseError(
                    line_no, "product row needs: product_id shelf_id row col price name | brand | variety"
                )
            pid, shelf_id, row_s, col_s, price_s, names = parts
            try:
                row_n, col_n, price = int(row_s), int(col_s), int(price_s)
            except ValueError:
                raise ParseError(line_no, f"bad product row {row!r}") from None
            name_parts = [p.strip() for p in names.split("|")]
            name_parts += [""] * (3 - len(name_parts))
            if len(name_parts) > 3:
                raise ParseError(line_no, "product names take at most name | brand | variety")
            if pid in products:
                problems.append(f"duplicate product id {pid!r}")
                continue
            if shelf_id not in shelves:
                problems.append(f"product {pid!r} references unknown shelf {shelf_id!r}")
            if row_n < 1:
                problems.append(f"product {pid!r} row_from_top must be >= 1")
            if col_n < 1:
                problems.append(f"product {pid!r} col_from_left must be >= 1")
            if price < 0:
                problems.append(f"product {pid!r} price must be >= 0")
            if not name_parts[0]:
                problems.append(f"product {pid!r} has an empty name")
            products[pid] = ProductRecord(pid, name_parts[0], name_parts[1], name_parts[2], shelf_id, row_n, col_n, price)

    store_map = StoreMap(width, len(grid_rows), tuple(cells), tuple(aisle_columns))

    if not any(kind is CellKind.WALKABLE for kind in store_map.cells):
        problems.append("map has no walkable cell")
    referenced_glyphs = {shelf.glyph for shelf in shelves.values()}
    for glyph, cell in sorted(shelf_glyph_cells.items()):
        if glyph not in referenced_glyphs:
            problems.append(f"map letter {glyph!r} at {cell} has no shelf record")
    for column in aisle_columns:
        if not 0 <= column < width:
            problems.append(f"aisle column {column} outside the map")
    for shelf in shelves.values():
        if not store_map.is_walkable(shelf.approach_cell):
            problems.append(
                f"shelf {shelf.shelf_id!r} approach cell {shelf.approach_cell} is not walkable"
            )

    if problems:
        raise ValidationError(problems)
    return Store(store_map, shelves, markers, products)


def save_store(store: Store) -> str:
    """Serialize to canonical form: fixed section order, rows sorted by id."""
    glyph_by_cell = {shelf.shelf_cell: shelf.glyph for shelf in store.shelves.values()}
    lines = ["[map]"]
    for y in range(store.map.height):
        row = []
        for x in range(store.map.width):
            kind = store.map.kind_at((x, y))
            if kind is CellKind.WALKABLE:
                row.append(".")
            elif kind is CellKind.BLOCKED:
                row.append("#")
            else:
                row.append(glyph_by_cell[(x, y)])
        lines.append("".join(row))
    if store.map.aisle_columns:
        lines += ["", "[aisles]", " ".join(str(c) for c in sorted(store.map.aisle_columns))]
    if store.shelves:
        lines += ["", "[shelves]"]
        for shelf in sorted(store.shelves.values(), key=lambda s: s.shelf_id):
            lines.append(f"{shelf.shelf_id}  {shelf.glyph}  {shelf.facing.value}  {shelf.section_name}")
    if store.markers:
        lines += ["", "[markers]"]
        for marker in sorted(store.markers.values(), key=lambda m: m.marker_id):
            lines.append(f"{marker.marker_id}  {marker.shelf_id}  {marker.physical_size_m:g}")
    if store.products:
        lines += ["", "[products]"]
        for p in sorted(store.products.values(), key=lambda p: p.product_id):
            lines.append(
                f"{p.product_id}  {p.shelf_id}  {p.row_from_top}  {p.col_from_left}  {p.price}  "
                f"{p.name} | {p.brand} | {p.variety}"
            )
    return "\n".join(lines) + "\n"


def _split_sections(document: str) -> dict[str, tuple[list[tuple[str, int]], int]]:
    """Split the document into named sections of (line, line_no) rows.

    Inside [map] every non-blank line is taken verbatim (maps legitimately
    start with '#'); elsewhere blank lines and '#' comments are skipped.
    """
    sections: dict[str, tuple[list[tuple[str, int]], int]] = {}
    current: str | None = None
    for line_no, raw in enumerate(document.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.lower() in _SECTION_HEADERS:
            name = stripped[1:-1].lower()
            if name in sections:
                raise ParseError(line_no, f"duplicate section [{name}]")
            sections[name] = ([], line_no)
            current = name
            continue
        if not stripped:
            continue
        if current is None:
            if stripped.startswith("#"):
                continue
            raise ParseError(line_no, f"content before any section header: {stripped!r}")
        if current != "map" and stripped.startswith("#"):
            continue
        sections[current][0].append((stripped, line_no))
    return sections
