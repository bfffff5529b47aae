import pytest

from privacyagent.schema import (
    BASE_ELEMENTS,
    ConflictError,
    UnknownElement,
    base_schema,
    load_schema_extension,
    resolve_refs,
    schema_table_markdown,
)

SCHEMA = base_schema()

EXT = 'dataschema "https://x.example/s" { element vehicle.plate type text category government-id }'


def test_base_schema_has_27_elements():
    assert len(SCHEMA.elements) == len(BASE_ELEMENTS) == 27


def test_email_category():
    assert SCHEMA.elements["user.home-info.online.email"].category == "online-contact"


def test_cookies_virtual_state():
    elem = SCHEMA.elements["dynamic.cookies"]
    assert elem.virtual
    assert elem.category == "state"


def test_tree_property_holds():
    leaves = sorted(SCHEMA.elements)
    for a in leaves:
        for b in leaves:
            assert a == b or not b.startswith(a + ".")


def test_leaf_resolves_to_itself():
    assert resolve_refs(SCHEMA, "user.name.given") == ("user.name.given",)


def test_home_info_prefix_resolves_to_7_leaves():
    leaves = resolve_refs(SCHEMA, "user.home-info")
    assert len(leaves) == 7
    assert leaves == tuple(sorted(leaves))


def test_unknown_ref():
    with pytest.raises(UnknownElement):
        resolve_refs(SCHEMA, "user.shoe-size")


def test_extension_adds_element():
    merged = load_schema_extension(EXT, SCHEMA)
    assert "vehicle.plate" in merged.elements
    assert len(merged.elements) == 28
    assert merged.elements["vehicle.plate"].source_uri == "https://x.example/s"


def test_extension_prefix_conflict():
    ext = 'dataschema "https://x.example/s" { element user.name type text category demographic }'
    with pytest.raises(ConflictError):
        load_schema_extension(ext, SCHEMA)


def test_extension_leaf_conflict():
    ext = 'dataschema "https://x.example/s" { element user.bday.year type text category demographic }'
    with pytest.raises(ConflictError):
        load_schema_extension(ext, SCHEMA)


def test_disjoint_extensions_commute():
    ext2 = 'dataschema "https://y.example/s" { element pet.name type text category preference }'
    ab = load_schema_extension(ext2, load_schema_extension(EXT, SCHEMA))
    ba = load_schema_extension(EXT, load_schema_extension(ext2, SCHEMA))
    assert ab == ba


def test_resolution_monotone_under_extension():
    ext = 'dataschema "https://x.example/s" { element user.vault.pin type text category financial }'
    merged = load_schema_extension(ext, SCHEMA)
    for prefix in ("user", "user.name", "dynamic"):
        before = set(resolve_refs(SCHEMA, prefix))
        after = set(resolve_refs(merged, prefix))
        assert before <= after


def test_schema_table_row_count():
    table = schema_table_markdown()
    rows = [l for l in table.splitlines() if l.startswith("| user") or l.startswith("| dynamic")]
    assert len(rows) == 27
