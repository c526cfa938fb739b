use arnav::io::frames::{parse_frames, write_frames, MarkerFrame, MarkerFrameStream, ParseMode};
use arnav::{Error, LabeledPoint, Point3};
use proptest::prelude::*;

const WITH_BAD_ROW: &str = "frame,time,label,x,y,z\n\
    0,0,M1,1,2,3\n\
    0,0,M2,4,5,6\n\
    1,0.01,M1,1,2,abc\n\
    1,0.01,M2,4,5,6\n";

#[test]
fn lenient_mode_skips_one_bad_row() {
    let parsed = parse_frames(WITH_BAD_ROW.as_bytes(), ParseMode::Lenient).unwrap();
    assert_eq!(parsed.diagnostics.len(), 1);
    assert_eq!((parsed.diagnostics[0].line, parsed.diagnostics[0].column), (4, 6));
    assert_eq!(parsed.stream.len(), 2);
    assert_eq!(parsed.stream.frames[1].observations.len(), 1);
}

#[test]
fn strict_mode_reports_position() {
    match parse_frames(WITH_BAD_ROW.as_bytes(), ParseMode::Strict) {
        Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (4, 6)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn decreasing_frame_ids_rejected() {
    let text = "frame,time,label,x,y,z\n1,0,M1,0,0,0\n0,0,M1,0,0,0\n";
    assert!(matches!(
        parse_frames(text.as_bytes(), ParseMode::Lenient),
        Err(Error::NonMonotonicFrames { frame_id: 0, previous: 1, .. })
    ));
}

#[test]
fn wrong_header_rejected() {
    let text = "id,t,label,x,y,z\n0,0,M1,0,0,0\n";
    assert!(matches!(parse_frames(text.as_bytes(), ParseMode::Lenient), Err(Error::Parse { line: 1, .. })));
}

fn stream_strategy() -> impl Strategy<Value = MarkerFrameStream> {
    let coord = -1e4..1e4f64;
    let frame = prop::collection::vec((0usize..6, coord.clone(), coord.clone(), coord), 1..6);
    prop::collection::vec((1i64..5, frame), 1..20).prop_map(|frames| {
        let mut id = 0;
        let frames = frames
            .into_iter()
            .map(|(step, obs)| {
                id += step;
                let mut seen = std::collections::HashSet::new();
                let observations = obs
                    .into_iter()
                    .filter(|o| seen.insert(o.0))
                    .map(|(l, x, y, z)| LabeledPoint { label: format!("M{l}"), position: Point3::new(x, y, z) })
                    .collect();
                MarkerFrame { frame_id: id, time: id as f64 / 120.0, observations }
            })
            .collect();
        MarkerFrameStream::new(frames).unwrap()
    })
}

proptest! {
    #[test]
    fn csv_round_trip_is_exact(stream in stream_strategy()) {
        let mut buf = Vec::new();
        write_frames(&stream, &mut buf).unwrap();
        let parsed = parse_frames(buf.as_slice(), ParseMode::Strict).unwrap();
        prop_assert!(parsed.diagnostics.is_empty());
        prop_assert_eq!(&parsed.stream, &stream);
        let mut again = Vec::new();
        write_frames(&parsed.stream, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }
}
