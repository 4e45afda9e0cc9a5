use amalgam_demo::{amalgamate_grid_json, box_image_json, grid_index, grid_index_json};

#[test]
fn grid_index_closure() {
    let v = grid_index_json(2, 2, "(1,0); (0,1)").unwrap();
    assert_eq!(v["elements"].as_array().unwrap().len(), 8);
    let closure: Vec<&str> = v["closure"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    assert_eq!(closure, ["(0,0)", "(0,1)", "(1,0)", "(1,1)"]);
    assert_eq!(v["tops"], serde_json::json!(["(1,1)"]));
}

#[test]
fn errors_are_json() {
    let v: serde_json::Value = serde_json::from_str(&grid_index(1, 1, "(5,5)")).unwrap();
    assert!(v["error"].is_string());
}

#[test]
fn oversized_grids_are_refused() {
    assert!(amalgamate_grid_json(4, 1, 2, 0).is_err());
    assert!(amalgamate_grid_json(3, 3, 2, 0).is_err());
    assert!(amalgamate_grid_json(1, 1, 4, 0).is_err());
}

#[test]
fn amalgamated_grid_matches_threads() {
    let v = amalgamate_grid_json(2, 2, 2, 4).unwrap();
    assert_eq!(v["embeddings_hold"], true);
    assert_eq!(v["threads"]["bijective"], true);
    assert_eq!(v["threads"]["count"], v["limit_atoms"]);
}

#[test]
fn box_images_verify() {
    for draw in 0..20 {
        let v = box_image_json(2, 1, 2, 0, draw).unwrap();
        assert_eq!(v["verified"], true, "{v}");
    }
}
