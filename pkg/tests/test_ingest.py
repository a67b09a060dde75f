from __future__ import annotations

import os

import pytest
from hypothesis import given, strategies as st

from eduvid.errors import (
    AuthError,
    CsvRowError,
    EmptyComponentError,
    NotFoundError,
    SchemaError,
    TransportError,
)
from eduvid.ingest import (
    EngagementRecord,
    ManualMetadata,
    RemoteMetadata,
    TAG_PATTERN,
    fetch_video_metadata,
    import_engagement,
    make_dataset_tag,
    serialize_engagement,
)


def manual(**overrides) -> ManualMetadata:
    fields = dict(institution_name="Institution", speaker_name="Speaker",
                  course_code="UnitCode", course_name="Engineering_Materials",
                  unit_level="Year_1", year=2020, video_type="Lecture",
                  subject_area="Mechanical_Engineering")
    fields.update(overrides)
    return ManualMetadata(**fields)


class TestDatasetTag:
    def test_canonical_example(self):
        tag = make_dataset_tag(manual())
        assert tag.value == "institution_unitcode_lecture_year1_speaker_2020"

    def test_deterministic(self):
        m = manual(institution_name="A", course_code="B", speaker_name="C",
                   year=2021)
        assert make_dataset_tag(m) == make_dataset_tag(m)

    def test_empty_component(self):
        with pytest.raises(EmptyComponentError):
            make_dataset_tag(manual(institution_name="!!!"))

    def test_case_insensitive(self):
        upper = manual(institution_name="INSTITUTION", speaker_name="SPEAKER",
                       course_code="UNITCODE", unit_level="YEAR_1")
        assert make_dataset_tag(upper) == make_dataset_tag(manual())

    @given(st.text(min_size=1),
           st.text(alphabet=st.characters(codec="ascii"), min_size=1))
    def test_tag_matches_pattern_or_rejects(self, institution, speaker):
        try:
            tag = make_dataset_tag(manual(institution_name=institution,
                                          speaker_name=speaker))
        except EmptyComponentError:
            return
        assert TAG_PATTERN.match(tag.value)

    @given(st.text(alphabet=st.characters(codec="ascii"), min_size=1))
    def test_tag_case_insensitive_property(self, institution):
        try:
            lower_tag = make_dataset_tag(manual(institution_name=institution))
        except EmptyComponentError:
            with pytest.raises(EmptyComponentError):
                make_dataset_tag(manual(institution_name=institution.upper()))
            return
        assert make_dataset_tag(manual(institution_name=institution.upper())) \
            == lower_tag


class TestRemoteMetadata:
    def test_url_must_contain_video_id(self):
        with pytest.raises(ValueError):
            RemoteMetadata(video_id="abc", url="https://example.com/other")

    def test_empty_video_id_rejected(self):
        with pytest.raises(ValueError):
            RemoteMetadata(video_id="", url="https://example.com/")


class FixtureTransport:
    """Recorded responses: (status, payload) or an exception to raise."""

    def __init__(self, status=200, payload=None, raises=None):
        self.status = status
        self.payload = payload or {}
        self.raises = raises
        self.calls = []

    def get(self, url, params):
        self.calls.append((url, params))
        if self.raises is not None:
            raise self.raises
        return self.status, self.payload


def item(video_id="Cb3mbo0MkM", title="T", channel="C"):
    return {"id": video_id, "snippet": {
        "title": title, "publishedAt": "2020-03-01T00:00:00Z",
        "channelTitle": channel, "channelId": "UC123"}}


class TestFetchVideoMetadata:
    def test_identity_mapping_from_fixture(self):
        transport = FixtureTransport(payload={"items": [item(title="T",
                                                             channel="C")]})
        remote = fetch_video_metadata("Cb3mbo0MkM", "key", transport)
        assert remote.title == "T"
        assert remote.channel_name == "C"

    def test_empty_items_is_not_found(self):
        with pytest.raises(NotFoundError):
            fetch_video_metadata("X", "key", FixtureTransport(payload={"items": []}))

    def test_reference_video_id_round_trips_into_url(self):
        transport = FixtureTransport(payload={"items": [item()]})
        remote = fetch_video_metadata("Cb3mbo0MkM", "key", transport)
        assert remote.video_id == "Cb3mbo0MkM"
        assert "Cb3mbo0MkM" in remote.url

    def test_credential_rejected(self):
        transport = FixtureTransport(status=403, payload={"error": {"message": "bad key"}})
        with pytest.raises(AuthError):
            fetch_video_metadata("X", "key", transport)

    def test_network_failure_is_transport_error(self):
        transport = FixtureTransport(raises=TransportError("boom"))
        with pytest.raises(TransportError):
            fetch_video_metadata("X", "key", transport)

    def test_empty_credential_rejected_before_transport(self):
        transport = FixtureTransport()
        with pytest.raises(AuthError):
            fetch_video_metadata("X", "", transport)
        assert transport.calls == []


class TestImportEngagement:
    def test_single_row(self):
        records = import_engagement(b"video_id,average_percentage_viewed\nA,75.5\n")
        assert records == [EngagementRecord(video_id="A",
                                            average_percentage_viewed=75.5)]

    def test_out_of_range_reports_row(self):
        with pytest.raises(CsvRowError) as err:
            import_engagement(b"video_id,average_percentage_viewed\nA,101\n")
        assert err.value.row == 1

    def test_unknown_column_ignored(self):
        records = import_engagement(
            b"video_id,average_percentage_viewed,mystery\nA,50,zzz\n")
        assert records[0].average_percentage_viewed == 50.0

    def test_missing_mandatory_column(self):
        with pytest.raises(SchemaError):
            import_engagement(b"video_id,views\nA,10\n")

    def test_dashboard_header_alias(self):
        records = import_engagement(
            b"Video ID,Average percentage viewed (%)\nA,42.5\n")
        assert records[0].video_id == "A"
        assert records[0].average_percentage_viewed == 42.5

    def test_optional_counts_parsed(self):
        records = import_engagement(
            b"video_id,average_percentage_viewed,views,likes,dislikes\n"
            b"A,60.0,100,5,1\n")
        assert records[0].views == 100
        assert records[0].likes == 5
        assert records[0].dislikes == 1

    def test_non_numeric_percentage(self):
        with pytest.raises(CsvRowError) as err:
            import_engagement(b"video_id,average_percentage_viewed\nA,oops\n")
        assert err.value.row == 1

    def test_rows_preserved_in_file_order(self):
        records = import_engagement(
            b"video_id,average_percentage_viewed\nB,10\nA,20\nC,30\n")
        assert [r.video_id for r in records] == ["B", "A", "C"]


@pytest.mark.skipif(not os.environ.get("EDUVID_LIVE_TEST"),
                    reason="opt-in: set EDUVID_LIVE_TEST=1 and EDUVID_API_KEY")
def test_live_transport_integration():
    from eduvid.ingest import HttpTransport

    key = os.environ.get("EDUVID_API_KEY", "")
    remote = fetch_video_metadata("dQw4w9WgXcQ", key, HttpTransport())
    assert remote.video_id == "dQw4w9WgXcQ"
    assert remote.title


engagement_records = st.lists(
    st.builds(
        EngagementRecord,
        video_id=st.text(alphabet=st.characters(codec="ascii",
                                                categories=["L", "N"]),
                         min_size=1, max_size=12),
        average_percentage_viewed=st.floats(min_value=0.0, max_value=100.0,
                                            allow_nan=False),
        views=st.none() | st.integers(min_value=0, max_value=10**9),
        likes=st.none() | st.integers(min_value=0, max_value=10**9),
        dislikes=st.none() | st.integers(min_value=0, max_value=10**9),
    ),
    max_size=20)


@given(engagement_records)
def test_engagement_round_trip(records):
    assert import_engagement(serialize_engagement(records)) == records
