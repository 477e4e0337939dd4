// SPDX-License-Identifier: MIT OR Apache-2.0

//! Ingestion of the bundled Lahman Teams extract.

use std::path::PathBuf;

use eras::baseball::{
    build_league_panel, build_stat_panel, build_team_panel, load_teams_csv, FranchiseMap,
    PanelRecipe, Stat, STAT_PANEL_FRANCHISES, TEAM_STATS,
};

fn teams_csv() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/lahman/Teams.csv")
}

#[test]
fn loads_every_season() {
    let rows = load_teams_csv(&teams_csv()).unwrap();
    assert_eq!(rows.len(), 2955);
    assert_eq!(rows.iter().map(|r| r.year).min(), Some(1871));
    assert_eq!(rows.iter().map(|r| r.year).max(), Some(2020));
    // 30 clubs in every season since the 1998 expansion
    assert_eq!(rows.iter().filter(|r| r.year == 2020).count(), 30);
    let twins_1961 = rows.iter().find(|r| r.year == 1961 && r.team_id == "MIN").unwrap();
    assert_eq!(twins_1961.franchise, "MIN");
}

#[test]
fn league_and_stat_panels() {
    let rows = load_teams_csv(&teams_csv()).unwrap();
    let league = build_league_panel(&rows, &PanelRecipe::league()).unwrap();
    assert_eq!((league.n_series(), league.len()), (4, 121));
    assert_eq!(league.time_index()[0], 1900);
    for row in league.rows() {
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        assert!(mean.abs() < 1e-9);
    }
    for stat in [Stat::SO, Stat::Attendance] {
        let p = build_stat_panel(&rows, stat, &PanelRecipe::per_statistic(stat)).unwrap();
        assert_eq!(p.n_series(), STAT_PANEL_FRANCHISES.len());
        assert_eq!(p.len(), 121);
    }
}

#[test]
fn every_active_franchise_with_enough_seasons_builds() {
    let rows = load_teams_csv(&teams_csv()).unwrap();
    let map = FranchiseMap::builtin();
    let active: Vec<_> = map.franchises().into_iter().filter(|f| f.active).collect();
    assert_eq!(active.len(), 30);
    for f in active {
        let p = build_team_panel(&rows, &f.canonical_id, &TEAM_STATS, 5).unwrap();
        assert_eq!(p.n_series(), TEAM_STATS.len());
        assert!(p.len() >= 10, "{}", f.label);
    }
}
