use smom::distributions::{sample, RecipeId};
use smom::recipes::{
    all_recipes, recipe_class, run_recipe, validate_recipe, RecipeClass, RecipeOptions,
};
use smom::Status;

#[test]
fn every_recipe_validates_and_runs() {
    let opts = RecipeOptions::default();
    let mut ok = 0;
    let all = all_recipes();
    assert!(all.len() > 50);
    for name in &all {
        let r: RecipeId = name.parse().unwrap();
        validate_recipe(&r).unwrap();
        recipe_class(&r).unwrap();
        let theta = r.dist.default_theta();
        let xs = sample(&r.dist, &theta, 200, 12).unwrap();
        let est = run_recipe(&r, &xs, &opts).unwrap_or_else(|e| panic!("{name}: {e}"));
        if let Some(t) = est.ok_theta() {
            let model = smom::distributions::make_model(&r.dist).unwrap();
            assert!(model.in_param_space(t), "{name}: {t:?}");
            ok += 1;
        } else {
            assert_ne!(est.status, Status::Ok);
        }
    }
    assert!(ok as f64 >= 0.9 * all.len() as f64, "{ok} of {}", all.len());
}

#[test]
fn unknown_recipes_are_rejected() {
    let r: RecipeId = "gamma:NOPE".parse().unwrap();
    assert!(validate_recipe(&r).is_err());
    assert!("nosuch:MO".parse::<RecipeId>().is_err());
    assert!("gamma".parse::<RecipeId>().is_err());
    assert!("gamma:".parse::<RecipeId>().is_err());
}

#[test]
fn recipe_classes() {
    let class = |s: &str| recipe_class(&s.parse().unwrap()).unwrap();
    assert_eq!(class("gamma:MO"), RecipeClass::Explicit);
    assert_eq!(class("gamma:TwoStep"), RecipeClass::Efficient);
    assert_eq!(class("lomax:IterMLE"), RecipeClass::Likelihood);
    assert_eq!(class("gamma:ML"), RecipeClass::Likelihood);
    assert_eq!(class("cauchy:L1"), RecipeClass::Other);
}

#[test]
fn first_step_override_is_honoured() {
    let xs = sample(&"gamma".parse().unwrap(), &[2.0, 1.0], 300, 1).unwrap();
    let opts = RecipeOptions::default();
    let a = run_recipe(&"gamma:TwoStep".parse().unwrap(), &xs, &opts).unwrap();
    let b = run_recipe(&"gamma:TwoStep@MO".parse().unwrap(), &xs, &opts).unwrap();
    let (ta, tb) = (a.ok_theta().unwrap(), b.ok_theta().unwrap());
    assert!(ta.iter().zip(tb).all(|(u, v)| (u - v).abs() < 0.2));
    assert_ne!(ta, tb);
}

#[test]
fn out_of_support_data_is_an_error() {
    let opts = RecipeOptions::default();
    assert!(run_recipe(&"gamma:MO".parse().unwrap(), &[1.0, -2.0], &opts).is_err());
}
