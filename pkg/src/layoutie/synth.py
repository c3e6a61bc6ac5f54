"""Synthetic detail-page corpus generator with a deterministic layout engine.

Three verticals ship by default (movie, player, university), each with six
sites that differ in layout convention (relation-left, relation-above, or
mixed), colon usage, typography, and page chrome (navigation, footers,
ad sidebars, relational stats tables, related-content rails). Relation
strings repeat on every page of a site; object strings are held to at
most two pages per site, so site frequency separates the two populations.
Rail entries draw from the same value pools as gold objects and render in
the same style, but never sit next to a relation label.

Every placed (relation, object) pair is emitted as a GoldLabel carrying
both surface forms (with and without a trailing colon) and the resolved
field ids. Multi-valued relations place a second value one row further
away, which makes some gold pairs and some cross-section non-pairs have
identical center offsets; telling them apart requires looking at the
neighborhood, not the pair alone.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .snapshot import (
    BoundingBox,
    PageSnapshot,
    SiteCorpus,
    TextField,
    VisualAttributes,
    compute_site_frequencies,
    normalize_text,
    parse_dom_path,
    serialize_snapshot,
)

PAGE_WIDTH = 1280.0
PAGE_HEIGHT = 2300.0
ROW_HEIGHT = 18.0
ROW_PITCH = 34.0
MARGIN = 40.0

# one markup tag per section type; a tag inventory larger than any relation
# inventory keeps every section's tag distinct within a site
SECTION_TAGS = (
    "span", "b", "i", "a", "em", "strong", "u", "small",
    "p", "q", "li", "dd", "dt", "abbr", "cite", "mark",
)


# -- layout engine ------------------------------------------------------------


@dataclass(frozen=True)
class CellSpec:
    """One text run to place: content, style, and a requested left edge."""

    text: str
    x: float
    dom_path: str
    font_size: float = 14.0
    typeface: str = "arial"
    font_weight: str = "normal"
    font_style: str = "normal"
    color: tuple[int, int, int] = (0, 0, 0)
    text_alignment: str = "left"
    width: float | None = None  # fixed box width (table cells); text-sized otherwise


def text_width(text: str, font_size: float, bold: bool) -> float:
    """Deterministic width model standing in for real font metrics."""
    per_char = font_size * (0.62 if bold else 0.55)
    return float(max(18, int(round(len(text) * per_char))))


class PageComposer:
    """Flow layout over a fixed row grid: integer bboxes, no overlaps.

    Rows advance by ROW_PITCH; a cell whose requested x would overflow the
    right margin wraps to the row below its neighbors. Absolute placement
    exists for out-of-flow regions (the ad sidebar).
    """

    def __init__(self, page_width: float = PAGE_WIDTH, page_height: float = PAGE_HEIGHT):
        self.page_width = page_width
        self.page_height = page_height
        self.y = 20.0
        self._placed: list[tuple[CellSpec, float, float, float]] = []

    def place_row(self, cells: list[CellSpec]) -> None:
        bottom = self.y
        for cell in cells:
            w = cell.width if cell.width is not None else text_width(
                cell.text, cell.font_size, cell.font_weight == "bold")
            x, y = cell.x, self.y
            if x + w > self.page_width - MARGIN:
                # overflow: wrap below the current row, flush left
                y = bottom + ROW_PITCH
                x = MARGIN
                w = min(w, self.page_width - 2 * MARGIN)
            self._placed.append((cell, x, y, w))
            bottom = max(bottom, y)
        self.y = bottom + ROW_PITCH

    def place_abs(self, cell: CellSpec, x: float, y: float) -> None:
        w = cell.width if cell.width is not None else text_width(
            cell.text, cell.font_size, cell.font_weight == "bold")
        self._placed.append((cell, x, y, w))

    def skip(self, px: float) -> None:
        self.y += px

    def build(self, page_id: str, site_id: str, vertical_id: str, topic: str) -> PageSnapshot:
        fields = []
        for i, (cell, x, y, w) in enumerate(self._placed):
            if y + ROW_HEIGHT > self.page_height:
                raise ValueError(f"content overflows page height at {cell.text!r}")
            fields.append(
                TextField(
                    field_id=f"f{i:03d}",
                    text=normalize_text(cell.text),
                    bbox=BoundingBox(x=x, y=y, width=w, height=ROW_HEIGHT),
                    visual=VisualAttributes(
                        font_size=cell.font_size,
                        typeface=cell.typeface,
                        font_weight=cell.font_weight,
                        font_style=cell.font_style,
                        color=cell.color,
                        text_alignment=cell.text_alignment,
                    ),
                    dom_path=parse_dom_path(cell.dom_path),
                )
            )
        return PageSnapshot(
            page_id=page_id,
            site_id=site_id,
            vertical_id=vertical_id,
            topic_entity=normalize_text(topic),
            page_width=self.page_width,
            page_height=self.page_height,
            fields=tuple(fields),
        )


def field_id_of(page: PageSnapshot, text: str, occurrence: int = 0) -> str:
    matches = [f.field_id for f in page.fields if f.text == text]
    return matches[occurrence]


# -- relation inventories ---------------------------------------------------


@dataclass(frozen=True)
class RelationSpec:
    name: str
    surfaces: tuple[str, str, str]
    value_kind: str
    multi: bool = False


_FIRST = (
    "Ava", "Liam", "Noah", "Emma", "Mia", "Ethan", "Lucas", "Sofia", "Oliver",
    "Amelia", "Elijah", "Isla", "Mason", "Zoe", "Logan", "Nora", "Caleb",
    "Ruby", "Henry", "Stella", "Owen", "Hazel", "Felix", "Ivy", "Jonas",
    "Clara", "Miles", "June", "Silas", "Pearl", "Hugo", "Wren", "Otis",
    "Daphne", "Rhys", "Elsa", "Abel", "Vera", "Knox", "Iris",
)
_LAST = (
    "Hartley", "Mercer", "Vance", "Whitaker", "Calloway", "Bennett", "Rourke",
    "Ashford", "Kingsley", "Draper", "Holloway", "Marsh", "Sterling", "Crane",
    "Fairbanks", "Lockwood", "Pemberton", "Quill", "Radcliffe", "Saxon",
    "Thorne", "Underhill", "Villiers", "Winslow", "Yardley", "Abbott",
    "Birch", "Colby", "Dunmore", "Ellery", "Farrow", "Granger", "Hale",
    "Ingram", "Jarvis", "Keating", "Lachlan", "Moss", "Norwood", "Ogden",
    "Prescott", "Quimby", "Rivers", "Sloane", "Tate", "Ursula", "Vaughn",
    "Wexford", "Yates", "Zeller", "Oakes", "Pike", "Renner", "Shaw", "Trent", "Usher",
)
_GENRES = (
    "Drama", "Comedy", "Action", "Thriller", "Horror", "Sci-Fi", "Romance",
    "Documentary", "Animation", "Crime", "Fantasy", "Western",
)
_LANGUAGES = (
    "English", "Spanish", "French", "German", "Italian", "Japanese", "Korean",
    "Mandarin", "Hindi", "Portuguese", "Russian", "Arabic", "Dutch", "Swedish",
)
_COUNTRIES = (
    "United States", "Canada", "United Kingdom", "France", "Germany", "Italy",
    "Spain", "Japan", "South Korea", "Australia", "Brazil", "Mexico", "India",
    "Sweden", "Norway", "Denmark", "Ireland", "New Zealand", "Austria",
    "Belgium", "Poland", "Portugal", "Greece", "Finland", "Iceland",
    "Argentina", "Chile", "Peru", "Hungary", "Czechia",
)
_STUDIO_A = (
    "Silver", "Golden", "Crimson", "Atlas", "Beacon", "Cascade", "Ember",
    "Falcon", "Granite", "Horizon",
)
_STUDIO_B = (
    "Arrow Pictures", "Gate Films", "Light Studios", "Peak Entertainment",
    "River Productions", "Stone Media", "Wave Cinema", "Crown Features",
    "Bridge Works", "Lantern Films",
)
_CITIES = (
    "Springfield", "Riverton", "Oakdale", "Fairview", "Brookhaven", "Lakewood",
    "Cedarville", "Mapleton", "Ashland", "Granville", "Hillsboro", "Westfield",
    "Clayton", "Dover", "Easton", "Franklin", "Georgetown", "Hamilton",
    "Irvington", "Jackson", "Kenton", "Linden", "Milford", "Newport",
    "Ottawa Falls", "Preston", "Quincy", "Redmond", "Salem", "Trenton",
    "Union City", "Vernon", "Walnut Grove", "Xenia", "York", "Zanesville",
    "Arlington", "Bristol", "Camden", "Dayton",
)
_STATES = (
    "AL", "AZ", "CA", "CO", "FL", "GA", "IL", "IN", "KY", "MA", "MI", "MN",
    "MO", "NC", "NJ", "NY", "OH", "OR", "PA", "TX",
)
_COLLEGES = (
    "Ridgemont", "Harlow", "Brexton", "Caldwell", "Denton", "Eastbrook",
    "Fallon", "Greenfield", "Hollis", "Ironwood", "Jasper", "Kendrick",
    "Larkin", "Montrose", "Norfield", "Oakhurst", "Pinecrest", "Quentin",
    "Rosemont", "Stratford", "Talmadge", "Updike", "Verona", "Westcott",
    "Yorkfield", "Zale", "Ashworth", "Boland", "Crestwood", "Dunbar",
    "Elmhurst", "Fairmount", "Glenview", "Hawthorne", "Ingleside", "Juniper",
    "Kingsford", "Lynwood", "Merritt", "Northgate",
)
_MASCOT_A = (
    "Golden", "Mighty", "Roaring", "Silver", "Thundering", "Flying", "Iron",
    "Blazing", "Crimson", "Emerald", "Royal", "Wild",
)
_MASCOT_B = (
    "Eagles", "Bears", "Wolves", "Hawks", "Lions", "Tigers", "Owls",
    "Panthers", "Falcons", "Bulls", "Stags", "Rams", "Foxes", "Badgers", "Herons",
)
_COLOR_A = (
    "Crimson", "Navy", "Forest", "Golden", "Royal", "Slate", "Burnt", "Pale",
    "Deep", "Bright", "Dusty", "Midnight", "Ivory", "Steel", "Copper",
)
_COLOR_B = (
    "Red", "Blue", "Green", "Gold", "Purple", "Gray", "Orange", "Silver",
    "Maroon", "Teal",
)
_UNI_SIZE = ("Large", "Small", "Mid-Size", "Historic")
_UNI_KIND = ("Private", "Public")
_UNI_FORM = (
    "Research University", "Liberal Arts College", "Technical Institute",
    "Community College", "Land-Grant University",
)
_MOTTO_WORDS = (
    "Lux", "Veritas", "Scientia", "Virtus", "Fortis", "Sapientia", "Libertas",
    "Concordia", "Fides", "Labor", "Gloria", "Pax", "Aurora", "Vita",
    "Ratio", "Honor", "Animus", "Tempus", "Astra", "Terra",
)
_AD_PRODUCTS = (
    "streaming plans", "season tickets", "campus tours", "movie bundles",
    "jerseys", "textbooks", "posters", "collectibles", "fan gear",
    "study guides", "travel deals", "memberships",
)
_TEAM_CITY = (
    "Austin", "Boise", "Carson", "Denton", "Eugene", "Fresno", "Galway",
    "Helena", "Ithaca", "Juneau", "Keswick", "Laredo", "Moline", "Nashua",
    "Olympia", "Provo", "Quantico", "Racine", "Sedona", "Tulsa",
)
_TEAM_NAME = (
    "Comets", "Drifters", "Express", "Generals", "Hornets", "Icebreakers",
    "Jets", "Knights", "Lancers", "Mariners", "Nomads", "Outlaws", "Pilots",
    "Quakes", "Rockets",
)
_POSITION_A = (
    "Starting", "Backup", "Veteran", "Rookie", "All-Star", "Reserve",
    "Franchise", "Two-Way",
)
_POSITION_B = (
    "Point Guard", "Shooting Guard", "Small Forward", "Power Forward", "Center",
)

MOVIE_RELATIONS = (
    RelationSpec("directed_by", ("Director", "Directed by", "Direction"), "person"),
    RelationSpec("produced_by", ("Producer", "Produced by", "Production"), "person", multi=True),
    RelationSpec("written_by", ("Writer", "Written by", "Screenplay"), "person"),
    RelationSpec("starring", ("Starring", "Cast", "Actors"), "person", multi=True),
    RelationSpec("genre", ("Genre", "Genres", "Category"), "genre_pair"),
    RelationSpec("release_year", ("Release Year", "Year", "Released"), "year"),
    RelationSpec("runtime", ("Runtime", "Duration", "Running Time"), "runtime"),
    RelationSpec("rating", ("Rating", "Score", "User Rating"), "rating"),
    RelationSpec("language", ("Language", "Languages", "Audio"), "language_pair"),
    RelationSpec("country", ("Country", "Region", "Origin"), "country"),
    RelationSpec("budget", ("Budget", "Total Budget", "Cost"), "money_million"),
    RelationSpec("box_office", ("Box Office", "Gross", "Total Gross"), "money_gross"),
    RelationSpec("studio", ("Studio", "Film Company", "Distributor"), "studio"),
    RelationSpec("cinematography", ("Cinematography", "Camera", "Camera Crew"), "person"),
)

PLAYER_RELATIONS = (
    RelationSpec("team", ("Team", "Current Team", "Club"), "team"),
    RelationSpec("position", ("Position", "Plays As", "Role"), "position"),
    RelationSpec("height", ("Height", "Ht", "Player Height"), "height"),
    RelationSpec("weight", ("Weight", "Wt", "Player Weight"), "weight_lbs"),
    RelationSpec("birth_date", ("Born", "Birth Date", "Date of Birth"), "date"),
    RelationSpec("birth_place", ("Birth Place", "Birthplace", "Hometown"), "city_state"),
    RelationSpec("college", ("College", "School", "Alma Mater"), "college", multi=True),
    RelationSpec("draft_year", ("Draft Year", "Drafted", "Draft Class"), "draft_year"),
    RelationSpec("jersey_number", ("Number", "Jersey", "Shirt Number"), "jersey"),
    RelationSpec("salary", ("Salary", "Annual Salary", "Earnings"), "salary"),
    RelationSpec("experience", ("Experience", "Years Pro", "Seasons Played"), "seasons"),
    RelationSpec("coach", ("Coach", "Head Coach", "Trainer"), "person"),
    RelationSpec("agent", ("Agent", "Represented By", "Agency Contact"), "person", multi=True),
    RelationSpec("nationality", ("Nationality", "Citizenship", "National Team"), "country"),
    RelationSpec("points", ("Game Points", "Avg Points", "PPG"), "ppg"),
)

UNIVERSITY_RELATIONS = (
    RelationSpec("location", ("Location", "Campus City", "City"), "city_state", multi=True),
    RelationSpec("established", ("Established", "Founded", "Est."), "founded_year"),
    RelationSpec("enrollment", ("Enrollment", "Student Body", "Total Students"), "enrollment"),
    RelationSpec("tuition", ("Tuition", "Annual Tuition", "Fees"), "tuition"),
    RelationSpec("acceptance_rate", ("Accept Rate", "Admission Rate", "Selectivity"), "percent"),
    RelationSpec("president", ("President", "Chancellor", "Provost"), "person"),
    RelationSpec("mascot", ("Mascot", "Team Mascot", "Team Symbol"), "mascot"),
    RelationSpec("colors", ("Colors", "School Colors", "Team Palette"), "color_name", multi=True),
    RelationSpec("type", ("Type", "Campus Type", "School Type"), "uni_type"),
    RelationSpec("endowment", ("Endowment", "Endowment Fund", "Fund Value"), "endowment"),
    RelationSpec("faculty", ("Faculty", "Academic Staff", "Professors"), "faculty"),
    RelationSpec("website", ("Website", "Web", "Homepage"), "website"),
    RelationSpec("motto", ("Motto", "School Motto", "Slogan"), "motto"),
)

VERTICALS: dict[str, tuple[RelationSpec, ...]] = {
    "movie": MOVIE_RELATIONS,
    "player": PLAYER_RELATIONS,
    "university": UNIVERSITY_RELATIONS,
}

NAV_ITEMS = {
    "movie": ("Home", "Movies", "News", "About", "Contact"),
    "player": ("Home", "Players", "Scores", "About", "Contact"),
    "university": ("Home", "Schools", "Rankings", "About", "Contact"),
}

TABLE_COLUMNS = {
    "movie": ("Top Billed", "Character Played", "Scenes"),
    "player": ("Season Row", "Games Logged", "Minutes Logged"),
    "university": ("Program Name", "Degree Level", "Cohort Size"),
}


def _sample_values(kind: str, rng: np.random.Generator) -> str:
    if kind == "person":
        return f"{rng.choice(_FIRST)} {rng.choice(_LAST)}"
    if kind == "genre_pair":
        a, b = rng.choice(len(_GENRES), size=2, replace=False)
        return f"{_GENRES[a]} / {_GENRES[b]}"
    if kind == "year":
        return str(rng.integers(1950, 2016))
    if kind == "runtime":
        return f"{rng.integers(62, 200)} min"
    if kind == "rating":
        return f"{rng.integers(5, 10)}.{rng.integers(0, 10)}/10"
    if kind == "language_pair":
        a, b = rng.choice(len(_LANGUAGES), size=2, replace=False)
        return f"{_LANGUAGES[a]}, {_LANGUAGES[b]}"
    if kind == "country":
        return str(rng.choice(_COUNTRIES))
    if kind == "money_million":
        return f"${rng.integers(1, 301)} million"
    if kind == "money_gross":
        return f"${rng.integers(1, 900)}.{rng.integers(0, 10)} million"
    if kind == "studio":
        return f"{rng.choice(_STUDIO_A)} {rng.choice(_STUDIO_B)}"
    if kind == "team":
        return f"{rng.choice(_TEAM_CITY)} {rng.choice(_TEAM_NAME)}"
    if kind == "position":
        return f"{rng.choice(_POSITION_A)} {rng.choice(_POSITION_B)}"
    if kind == "height":
        return f"{rng.integers(172, 222)} cm"
    if kind == "weight_lbs":
        return f"{rng.integers(160, 281)} lbs"
    if kind == "date":
        month = rng.choice(
            ("January", "February", "March", "April", "May", "June", "July",
             "August", "September", "October", "November", "December")
        )
        return f"{month} {rng.integers(1, 29)}, {rng.integers(1975, 2001)}"
    if kind == "city_state":
        return f"{rng.choice(_CITIES)}, {rng.choice(_STATES)}"
    if kind == "college":
        name = rng.choice(_COLLEGES)
        form = rng.choice(("University of {}", "{} State University", "{} College"))
        return str(form).format(name)
    if kind == "draft_year":
        return str(rng.integers(1995, 2021))
    if kind == "jersey":
        return f"#{rng.integers(0, 100)}"
    if kind == "salary":
        return f"${rng.integers(1, 40)}.{rng.integers(0, 10)}M per year"
    if kind == "seasons":
        return f"{rng.integers(1, 26)} seasons"
    if kind == "ppg":
        return f"{rng.integers(2, 35)}.{rng.integers(0, 10)} ppg"
    if kind == "founded_year":
        return str(rng.integers(1701, 1991))
    if kind == "enrollment":
        return f"{rng.integers(2, 60)},{rng.integers(0, 1000):03d} students"
    if kind == "tuition":
        return f"${rng.integers(8, 75)},{rng.integers(0, 1000):03d}"
    if kind == "percent":
        return f"{rng.integers(4, 96)}.{rng.integers(0, 10)}%"
    if kind == "mascot":
        return f"{rng.choice(_MASCOT_A)} {rng.choice(_MASCOT_B)}"
    if kind == "color_name":
        return f"{rng.choice(_COLOR_A)} {rng.choice(_COLOR_B)}"
    if kind == "uni_type":
        return f"{rng.choice(_UNI_SIZE)} {rng.choice(_UNI_KIND)} {rng.choice(_UNI_FORM)}"
    if kind == "endowment":
        return f"${rng.integers(1, 30)}.{rng.integers(0, 100):02d} billion"
    if kind == "faculty":
        return f"{rng.integers(1, 9)},{rng.integers(0, 1000):03d} faculty"
    if kind == "website":
        return f"www.{rng.choice(_COLLEGES).lower()}{rng.integers(10, 99)}.edu"
    if kind == "motto":
        a, b = rng.choice(len(_MOTTO_WORDS), size=2, replace=False)
        return f"{_MOTTO_WORDS[a]} et {_MOTTO_WORDS[b]}"
    if kind == "ad_line":
        return f"Save {rng.integers(5, 71)}% on {rng.choice(_AD_PRODUCTS)} today"
    if kind == "table_cell_text":
        return f"{rng.choice(_FIRST)} {rng.choice(_LAST)}"
    if kind == "table_cell_num":
        return str(rng.integers(1, 1000))
    raise KeyError(kind)


def _draw_unique(
    kind: str, rng: np.random.Generator, site_used: dict[str, int], page_used: set[str]
) -> str:
    """Sample a value used on < 2 pages of the site and not yet on this page."""
    for _ in range(400):
        value = _sample_values(kind, rng)
        if site_used.get(value, 0) < 2 and value not in page_used:
            site_used[value] = site_used.get(value, 0) + 1
            page_used.add(value)
            return value
    raise RuntimeError(f"value pool for {kind!r} exhausted")


# -- site templates -----------------------------------------------------------


CONVENTIONS = ("relation-left", "relation-left", "relation-left", "relation-above", "relation-above", "mixed")
COLON_SITES = (True, False, True, False, True, False)
TABLE_SITES = (False, True, False, True, False, False)
AD_SITES = (False, False, True, False, False, True)
# relation-above sites front every value line with a repeated bullet word,
# rendered in the label cell style; none of the words ends in a colon
MARKER_WORDS = ("Detail", "Info", "Item", "Entry", "Spec", "Note")

# every site closes its main column with a related-content rail: a plain
# heading over a short list of strings drawn from the same pools the gold
# values come from; the rail carries no relation label, so telling its
# entries from real objects takes the neighbourhood, not the cell alone
RELATED_HEADINGS = ("Related", "More Like This", "Popular Now", "Also Viewed", "Trending", "Readers Also Liked")
# one rail entry per kind and page; each vertical lists kinds whose pools
# leave room for the extra draws under the two-pages-per-site cap
DECOY_KINDS = {
    "movie": ("person", "genre_pair", "year", "money_gross", "studio"),
    "player": ("person", "team", "city_state", "date", "college"),
    "university": ("person", "city_state", "mascot", "founded_year", "enrollment"),
}

# one corpus-wide style: cross-site and cross-vertical variation comes from
# layout convention, colon usage, boldness, geometry, and page furniture, not
# from fonts or colors, so a style one-hot never activates only at test time
LABEL_TYPEFACE = "georgia"
VALUE_TYPEFACE = "arial"
LABEL_COLOR = (17, 17, 17)
VALUE_COLOR = (51, 51, 51)


@dataclass(frozen=True)
class SiteTemplate:
    """Everything that makes a site render the way it does."""

    site_id: str
    vertical_id: str
    seed: int
    convention: str
    colon: bool
    has_table: bool
    has_ads: bool
    label_typeface: str
    value_typeface: str
    label_size: float
    value_size: float
    label_color: tuple[int, int, int]
    value_color: tuple[int, int, int]
    label_x: float
    row_marker: str = ""
    pages: int = 40

    def label_width(self, relations: tuple[RelationSpec, ...]) -> float:
        """Shared label-column width: widest surface the site could render."""
        widest = max(
            text_width(s + ":" if self.colon else s, self.label_size, bold=True)
            for spec in relations
            for s in spec.surfaces
        )
        return widest + 8.0

    def value_x(self, relations: tuple[RelationSpec, ...]) -> float:
        return self.label_x + self.label_width(relations) + 20.0


def default_templates(vertical_id: str, root_seed: int, sites: int = 6, pages: int = 40) -> list[SiteTemplate]:
    vidx = sorted(VERTICALS).index(vertical_id)
    templates = []
    for s in range(sites):
        rng = np.random.default_rng(np.random.SeedSequence([root_seed, vidx, s]))
        templates.append(
            SiteTemplate(
                site_id=f"{vertical_id}-site-{s}",
                vertical_id=vertical_id,
                seed=int(rng.integers(0, 2**31)),
                convention=CONVENTIONS[s % len(CONVENTIONS)],
                colon=COLON_SITES[s % len(COLON_SITES)],
                has_table=TABLE_SITES[s % len(TABLE_SITES)],
                has_ads=AD_SITES[s % len(AD_SITES)],
                label_typeface=LABEL_TYPEFACE,
                value_typeface=VALUE_TYPEFACE,
                label_size=16.0,
                value_size=14.0,
                label_color=LABEL_COLOR,
                value_color=VALUE_COLOR,
                label_x=float(rng.integers(50, 71)),
                row_marker=MARKER_WORDS[s % len(MARKER_WORDS)],
                pages=pages,
            )
        )
    return templates


# -- gold labels --------------------------------------------------------------


@dataclass(frozen=True)
class GoldLabel:
    """One ground-truth (relation, object) pair resolved to page fields."""

    page_id: str
    relation_surfaces: tuple[str, ...]
    object_string: str
    closed_name: str
    relation_field_id: str
    object_field_id: str


def _topic_entity(vertical_id: str, rng: np.random.Generator, used: set[str]) -> str:
    for _ in range(400):
        if vertical_id == "movie":
            topic = f"The {rng.choice(_MASCOT_A)} {rng.choice(_MASCOT_B)[:-1]}"
        elif vertical_id == "player":
            topic = f"{rng.choice(_FIRST)} {rng.choice(_LAST)} Jr."
        else:
            topic = f"{rng.choice(_COLLEGES)} {rng.choice(('University', 'Institute', 'College'))}"
        if topic not in used:
            used.add(topic)
            return topic
    raise RuntimeError("topic pool exhausted")


def generate_site(template: SiteTemplate) -> tuple[SiteCorpus, list[GoldLabel]]:
    """Render every page of one site and return its corpus plus gold."""
    relations = VERTICALS[template.vertical_id]
    site_rng = np.random.default_rng(np.random.PCG64(template.seed))
    # the site fixes one surface form per relation
    surface_of = {
        spec.name: str(site_rng.choice(spec.surfaces)) for spec in relations
    }
    site_used: dict[str, int] = {}
    topics_used: set[str] = set()
    brand = f"{template.site_id.replace('-', ' ').title()} Guide"

    pages: list[PageSnapshot] = []
    gold: list[GoldLabel] = []
    for p in range(template.pages):
        page_rng = np.random.default_rng(np.random.SeedSequence([template.seed, p]))
        page_id = f"{template.site_id}-p{p:03d}"
        page, page_gold = _generate_page(
            template, relations, surface_of, brand, page_id,
            page_rng, site_used, topics_used,
        )
        pages.append(page)
        gold.extend(page_gold)
    return compute_site_frequencies(pages), gold


VALUE_WIDTH_CAP = 160.0


def _label_cell(template: SiteTemplate, text: str, dom: str, width: float) -> CellSpec:
    # column sites pass the shared column width so label centers line up
    # exactly; inline sites pass the text's natural width instead
    return CellSpec(
        text=text,
        x=template.label_x,
        dom_path=dom,
        font_size=template.label_size,
        typeface=template.label_typeface,
        font_weight="bold",
        color=template.label_color,
        width=width,
    )


def _value_cell(template: SiteTemplate, text: str, x: float, dom: str) -> CellSpec:
    # capped width keeps value centers near the label column; the caller
    # jitters x so capped values never line up into a false table grid
    return CellSpec(
        text=text,
        x=x,
        dom_path=dom,
        font_size=template.value_size,
        typeface=template.value_typeface,
        color=template.value_color,
        width=min(text_width(text, template.value_size, False), VALUE_WIDTH_CAP),
    )


def _generate_page(
    template: SiteTemplate,
    relations: tuple[RelationSpec, ...],
    surface_of: dict[str, str],
    brand: str,
    page_id: str,
    rng: np.random.Generator,
    site_used: dict[str, int],
    topics_used: set[str],
) -> tuple[PageSnapshot, list[GoldLabel]]:
    composer = PageComposer()
    page_used: set[str] = set()
    vertical = template.vertical_id
    topic = _topic_entity(vertical, rng, topics_used)

    # chrome: brand + nav + a colon-terminated search box with a constant value
    nav_cells = [CellSpec(text=brand, x=MARGIN, dom_path="/html[1]/body[1]/div[1]/b[1]",
                          font_size=16.0, typeface=template.label_typeface, font_weight="bold")]
    x = 320.0
    for i, item in enumerate(NAV_ITEMS[vertical]):
        nav_cells.append(CellSpec(text=item, x=x, dom_path=f"/html[1]/body[1]/div[1]/a[{i + 1}]",
                                  typeface=template.value_typeface, color=(0, 0, 128)))
        x += 90.0
    nav_cells.append(CellSpec(text="Search:", x=x + 40, dom_path="/html[1]/body[1]/div[1]/span[1]",
                              typeface=template.value_typeface))
    nav_cells.append(CellSpec(text="type here", x=x + 130, dom_path="/html[1]/body[1]/div[1]/span[2]",
                              typeface=template.value_typeface, color=(128, 128, 128)))
    composer.place_row(nav_cells)
    composer.skip(8.0)

    composer.place_row([CellSpec(text=topic, x=MARGIN, dom_path="/html[1]/body[1]/h1[1]",
                                 font_size=24.0, typeface=template.label_typeface, font_weight="bold")])
    composer.skip(40.0)

    # main sections, order shuffled per page
    order = rng.permutation(len(relations))
    placements: list[tuple[int, RelationSpec, str, list[str]]] = []
    for idx in order:
        spec = relations[idx]
        surface = surface_of[spec.name]
        display = surface + ":" if template.colon else surface
        count = 2 if spec.multi else 1
        values = [_draw_unique(spec.value_kind, rng, site_used, page_used) for _ in range(count)]
        placements.append((int(idx), spec, display, values))

    section_convention = {
        spec.name: (template.convention if template.convention != "mixed"
                    else str(rng.choice(("relation-left", "relation-above"))))
        for _, spec, _, _ in placements
    }

    label_w = template.label_width(relations)
    value_x = template.value_x(relations)

    def jitter() -> float:
        return float((int(composer.y) * 5) % 11)

    for s, (idx, spec, display, values) in enumerate(placements, start=1):
        # markup tag is bound to the section type, so sibling sections of
        # different relations never become DOM neighbours of one another
        tag = SECTION_TAGS[idx % len(SECTION_TAGS)]
        dom_base = f"/html[1]/body[1]/div[2]/div[{s}]/{tag}"
        conv = section_convention[spec.name]
        # colon sites run the value inline after the label text, the style the
        # colon convention comes from, so their labels keep natural widths;
        # colon-free sites align values in a shared column instead
        inline = conv == "relation-left" and template.colon
        cell_w = text_width(display, template.label_size, bold=True) if inline else label_w
        label = _label_cell(template, display, f"{dom_base}[1]", cell_w)
        if conv == "relation-left":
            vx = template.label_x + cell_w + 12.0 if inline else value_x
            composer.place_row([label, _value_cell(template, values[0], vx + jitter(), f"{dom_base}[2]")])
            if len(values) > 1:
                composer.place_row([_value_cell(template, values[1], vx + jitter(), f"{dom_base}[3]")])
            if inline:
                # inline entries sit apart, so a label's nearest field is its
                # own value and not the label of the entry underneath
                composer.skip(60.0)
        else:
            composer.place_row([label])
            # the bullet reuses the label cell verbatim and the value sits in
            # the relation-left value column, so a (field, field) pair carries
            # no styling or offset clue about which one is the real label; the
            # value also lives under its own markup tag, which keeps the label
            # a pure grid cell whose only neighbours are other grid cells, and
            # bullet paths never repeat an index pattern across sections, so
            # bullets form no page-wide clique that would drown their one
            # value neighbour under attention normalisation; the trailing edit
            # link marks bullet rows apart from relation-left rows for anyone
            # who can read a neighbourhood
            for k, text in enumerate(values, start=1):
                if template.row_marker:
                    composer.place_row([
                        _label_cell(template, template.row_marker,
                                    f"/html[1]/body[1]/div[2]/div[{s}]/kbd[{2 * s + k}]", label_w),
                        _value_cell(template, text, value_x + jitter(),
                                    f"/html[1]/body[1]/div[2]/div[{s}]/var[{2 * s + k}]"),
                        CellSpec(text="edit", x=value_x + 180.0,
                                 dom_path=f"/html[1]/body[1]/div[2]/div[{s}]/sup[{2 * s + k}]",
                                 font_size=12.0, typeface="arial", font_style="italic",
                                 color=(153, 153, 153)),
                    ])
                else:
                    composer.place_row([
                        _value_cell(template, text, template.label_x + 10 + jitter(),
                                    f"{dom_base}[{k + 1}]"),
                    ])

    # related-content rail: in-domain strings in the exact value style under
    # a plain heading instead of a relation label; the cell itself never says
    # it answers nothing, only the missing label next door does
    composer.skip(50.0)
    composer.place_row([CellSpec(
        text=RELATED_HEADINGS[template.seed % len(RELATED_HEADINGS)],
        x=value_x, dom_path="/html[1]/body[1]/div[5]/samp[1]",
        font_size=template.value_size, typeface=template.value_typeface,
        color=template.value_color,
    )])
    decoy_kinds = list(DECOY_KINDS[vertical])
    rng.shuffle(decoy_kinds)
    for j, kind in enumerate(decoy_kinds, start=2):
        composer.place_row([
            _value_cell(template, _draw_unique(kind, rng, site_used, page_used),
                        value_x + jitter(), f"/html[1]/body[1]/div[5]/samp[{j}]"),
        ])

    # relational stats table: aligned grid the postprocessor must discard
    if template.has_table:
        composer.skip(180.0)
        columns = TABLE_COLUMNS[vertical]
        xs = (template.label_x, template.label_x + 220, template.label_x + 440)
        widths = (200.0, 140.0, 140.0)  # fixed cell boxes keep the columns aligned
        header = [
            CellSpec(text=c, x=xs[i], dom_path=f"/html[1]/body[1]/div[2]/table[1]/tr[1]/td[{i + 1}]",
                     font_size=template.value_size, typeface=template.value_typeface,
                     font_weight="bold", width=widths[i])
            for i, c in enumerate(columns)
        ]
        composer.place_row(header)
        for r in range(2, 5):
            row = [
                CellSpec(
                    text=_draw_unique("table_cell_text" if i == 0 else "table_cell_num", rng, site_used, page_used),
                    x=xs[i],
                    dom_path=f"/html[1]/body[1]/div[2]/table[1]/tr[{r}]/td[{i + 1}]",
                    font_size=template.value_size,
                    typeface=template.value_typeface,
                    color=template.value_color,
                    width=widths[i],
                )
                for i in range(3)
            ]
            composer.place_row(row)

    # ad sidebar: chrome styled apart from content (italic, gray)
    if template.has_ads:
        ad_y = 140.0
        for a in range(1, 4):
            composer.place_abs(
                CellSpec(text="Advertisement", x=0, dom_path=f"/html[1]/body[1]/div[3]/div[{a}]/span[1]",
                         font_size=13.0, typeface="arial", font_weight="bold",
                         font_style="italic", color=(150, 150, 150)),
                880.0, ad_y,
            )
            for line in (2, 3):
                ad_y += ROW_PITCH
                composer.place_abs(
                    CellSpec(text=_draw_unique("ad_line", rng, site_used, page_used), x=0,
                             dom_path=f"/html[1]/body[1]/div[3]/div[{a}]/span[{line}]",
                             font_size=12.0, typeface="arial", font_style="italic",
                             color=(150, 150, 150)),
                    880.0, ad_y,
                )
            ad_y += ROW_PITCH + 14.0

    composer.skip(180.0)
    composer.place_row([
        CellSpec(text=f"(c) 2019 {brand}", x=MARGIN, dom_path="/html[1]/body[1]/div[4]/span[1]",
                 font_size=11.0, typeface=template.value_typeface, color=(119, 119, 119)),
        CellSpec(text="Privacy Policy", x=360.0, dom_path="/html[1]/body[1]/div[4]/span[2]",
                 font_size=11.0, typeface=template.value_typeface, color=(119, 119, 119)),
        CellSpec(text="Terms of Use", x=500.0, dom_path="/html[1]/body[1]/div[4]/span[3]",
                 font_size=11.0, typeface=template.value_typeface, color=(119, 119, 119)),
    ])

    page = composer.build(page_id, template.site_id, template.vertical_id, topic)

    gold: list[GoldLabel] = []
    for _, spec, display, values in placements:
        surfaces = (display, display[:-1]) if template.colon else (display,)
        rel_id = field_id_of(page, normalize_text(display), occurrence=0)
        for value in values:
            gold.append(
                GoldLabel(
                    page_id=page_id,
                    relation_surfaces=surfaces,
                    object_string=normalize_text(value),
                    closed_name=f"{template.vertical_id}.{spec.name}",
                    relation_field_id=rel_id,
                    object_field_id=field_id_of(page, normalize_text(value)),
                )
            )
    return page, gold


def generate_corpus(
    root_seed: int = 0,
    verticals: tuple[str, ...] = ("movie", "player", "university"),
    sites_per_vertical: int = 6,
    pages_per_site: int = 40,
) -> tuple[dict[str, dict[str, SiteCorpus]], dict[str, dict[str, list[GoldLabel]]]]:
    """The default benchmark corpus: corpora and gold keyed by vertical/site."""
    corpora: dict[str, dict[str, SiteCorpus]] = {}
    gold: dict[str, dict[str, list[GoldLabel]]] = {}
    for vertical in verticals:
        corpora[vertical] = {}
        gold[vertical] = {}
        for template in default_templates(vertical, root_seed, sites_per_vertical, pages_per_site):
            corpus, labels = generate_site(template)
            corpora[vertical][template.site_id] = corpus
            gold[vertical][template.site_id] = labels
    return corpora, gold


def relation_schema(vertical_id: str) -> list[str]:
    """Ordered ClosedIE schema: NO_RELATION first, then the vertical's names."""
    return ["NO_RELATION"] + [f"{vertical_id}.{spec.name}" for spec in VERTICALS[vertical_id]]


# -- label alignment for externally captured pages -----------------------------


def align_labels(
    page: PageSnapshot, raw_pairs: list[tuple[str, str]]
) -> list[GoldLabel]:
    """Resolve (predicate string, object string) pairs to concrete fields.

    Among all fields matching the predicate text and all matching the
    object text, the pair with the smallest center-to-center distance is
    chosen; exact ties fall back to lexicographic (predicate, object)
    field-id order. Pairs whose strings are absent are skipped with a
    warning rather than an error.
    """
    labels: list[GoldLabel] = []
    for predicate, obj in raw_pairs:
        pred_text = normalize_text(predicate)
        obj_text = normalize_text(obj)
        pred_fields = [f for f in page.fields if f.text == pred_text]
        obj_fields = [f for f in page.fields if f.text == obj_text]
        if not pred_fields or not obj_fields:
            missing = "predicate" if not pred_fields else "object"
            warnings.warn(
                f"page {page.page_id}: {missing} string not found for"
                f" ({predicate!r}, {obj!r}); label skipped"
            )
            continue
        best = None
        for pf in pred_fields:
            px, py = pf.bbox.center
            for of in obj_fields:
                if of.field_id == pf.field_id:
                    continue
                ox, oy = of.bbox.center
                dist = float(np.hypot(ox - px, oy - py))
                key = (dist, pf.field_id, of.field_id)
                if best is None or key < best:
                    best = key
        if best is None:
            warnings.warn(
                f"page {page.page_id}: no distinct field pair for ({predicate!r}, {obj!r})"
            )
            continue
        _, rel_id, obj_id = best
        surfaces = (pred_text, pred_text[:-1]) if pred_text.endswith(":") else (pred_text,)
        labels.append(
            GoldLabel(
                page_id=page.page_id,
                relation_surfaces=surfaces,
                object_string=obj_text,
                closed_name="",
                relation_field_id=rel_id,
                object_field_id=obj_id,
            )
        )
    return labels


# -- disk round trip ------------------------------------------------------------


def write_corpus(
    root: Path,
    corpora: dict[str, dict[str, SiteCorpus]],
    gold: dict[str, dict[str, list[GoldLabel]]],
) -> None:
    """One directory per site: page JSON documents plus gold.tsv."""
    for vertical in sorted(corpora):
        for site_id in sorted(corpora[vertical]):
            site_dir = Path(root) / vertical / site_id
            site_dir.mkdir(parents=True, exist_ok=True)
            for page in corpora[vertical][site_id].pages:
                (site_dir / f"{page.page_id}.json").write_text(serialize_snapshot(page))
            rows = [
                "\t".join(
                    (
                        g.page_id,
                        "|".join(g.relation_surfaces),
                        g.object_string,
                        g.closed_name,
                        g.relation_field_id,
                        g.object_field_id,
                    )
                )
                for g in gold[vertical][site_id]
            ]
            (site_dir / "gold.tsv").write_text("\n".join(rows) + "\n")


def read_gold_tsv(path: Path) -> list[GoldLabel]:
    labels = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        page_id, surfaces, obj, closed, rel_id, obj_id = line.split("\t")
        labels.append(
            GoldLabel(
                page_id=page_id,
                relation_surfaces=tuple(surfaces.split("|")),
                object_string=obj,
                closed_name=closed,
                relation_field_id=rel_id,
                object_field_id=obj_id,
            )
        )
    return labels


def read_corpus(root: Path) -> tuple[dict[str, dict[str, SiteCorpus]], dict[str, dict[str, list[GoldLabel]]]]:
    """Inverse of write_corpus."""
    from .snapshot import parse_snapshot

    corpora: dict[str, dict[str, SiteCorpus]] = {}
    gold: dict[str, dict[str, list[GoldLabel]]] = {}
    root = Path(root)
    for vertical_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        vertical = vertical_dir.name
        corpora[vertical] = {}
        gold[vertical] = {}
        for site_dir in sorted(p for p in vertical_dir.iterdir() if p.is_dir()):
            pages = [
                parse_snapshot(f.read_text())
                for f in sorted(site_dir.glob("*.json"))
            ]
            corpora[vertical][site_dir.name] = compute_site_frequencies(pages)
            gold[vertical][site_dir.name] = read_gold_tsv(site_dir / "gold.tsv")
    return corpora, gold
