#!/usr/bin/env python3
"""Builds the demo lab-report schema under fixtures/schema/.

The fixture is sized to a realistic multi-panel lab catalog: 13 scenarios,
137 scenario fields, 18 general fields, 30 distinct unit strings, and all
five value types. Run from the repository root:

    python3 scripts/make_fixture_schema.py
"""

import json
import os
import re

F = lambda key, vt="float", unit=None, conv=None, aliases=None, options=None, desc="": {
    "key": key,
    "aliases": aliases or [],
    "value_type": vt,
    "canonical_unit": unit,
    "unit_conversions": conv or {},
    "options": options,
    "description": desc,
}

POS_NEG = {"+": "positive", "-": "negative", "±": "weakly positive",
           "阴性": "negative", "阳性": "positive"}
GRADED = {"+": "positive 1+", "++": "positive 2+", "+++": "positive 3+",
          "-": "negative", "±": "weakly positive"}


def scenario(sid, name, cues, directives, fields):
    return {
        "id": sid,
        "name": name,
        "cues": cues,
        "few_shot_directives": [{"condition": c, "conclusion": k} for c, k in directives],
        "fields": fields,
    }


SCENARIOS = [
    scenario(
        "cbc", "Complete Blood Count",
        ["White Blood Cell Count", "Hemoglobin", "Platelet Count", "血常规"],
        [("counts such as WBC, RBC, HGB and PLT with 10^9/L or 10^12/L units",
          "the report contains a Complete Blood Count")],
        [
            F("White Blood Cell Count (WBC)", unit="10^9/L", aliases=["WBC", "白细胞计数"]),
            F("Red Blood Cell Count (RBC)", unit="10^12/L", aliases=["RBC", "红细胞计数"]),
            F("Hemoglobin (HGB)", unit="g/L", conv={"g/dL": 10, "g/L": 1}, aliases=["HGB", "血红蛋白"]),
            F("Hematocrit (HCT)", unit="%", aliases=["HCT", "红细胞压积"]),
            F("Mean Corpuscular Volume (MCV)", unit="fL", aliases=["MCV"]),
            F("Mean Corpuscular Hemoglobin (MCH)", unit="pg", aliases=["MCH"]),
            F("Platelet Count (PLT)", unit="10^9/L", aliases=["PLT", "血小板计数"]),
            F("Neutrophil Percentage", unit="%", aliases=["NEUT%", "中性粒细胞比例"]),
            F("Lymphocyte Percentage", unit="%", aliases=["LYMPH%", "淋巴细胞比例"]),
            F("Monocyte Percentage", unit="%", aliases=["MONO%"]),
            F("Blood Smear Morphology", vt="string", aliases=["涂片形态"], desc="free-text smear note"),
        ],
    ),
    scenario(
        "urinalysis", "Urinalysis",
        ["Urine Protein", "Urine Glucose", "Specific Gravity", "尿常规"],
        [("dipstick grades such as +, ++ or negative next to urine analytes",
          "the report contains a Urinalysis")],
        [
            F("Urine Protein (PRO)", vt="dictionary", options=GRADED, aliases=["PRO", "尿蛋白"]),
            F("Urine Glucose (GLU-U)", vt="dictionary", options=GRADED, aliases=["GLU-U", "尿糖"]),
            F("Urine Ketones (KET)", vt="dictionary", options=GRADED, aliases=["KET", "尿酮体"]),
            F("Urine Occult Blood (BLD)", vt="dictionary", options=GRADED, aliases=["BLD", "尿潜血"]),
            F("Urine Nitrite (NIT)", vt="dictionary", options=POS_NEG, aliases=["NIT"]),
            F("Urine Specific Gravity", aliases=["SG", "尿比重"]),
            F("Urine pH", aliases=["pH值"]),
            F("Urine White Blood Cells", unit="/HP", aliases=["WBC", "尿白细胞"]),
            F("Urine Red Blood Cells", unit="/HP", aliases=["RBC", "尿红细胞"]),
            F("Urine Casts", unit="HP", aliases=["管型"], desc="casts seen per whole field"),
            F("Urine Appearance", vt="string", aliases=["外观"]),
        ],
    ),
    scenario(
        "cmp", "Comprehensive Metabolic Panel",
        ["Total Protein", "Albumin", "ALT", "AST", "生化全项"],
        [("a long enzyme and electrolyte list with U/L units",
          "the report contains a Comprehensive Metabolic Panel")],
        [
            F("Total Protein (TP)", unit="g/L", conv={"g/dL": 10}, aliases=["TP", "总蛋白"]),
            F("Albumin (ALB)", unit="g/L", conv={"g/dL": 10}, aliases=["ALB", "白蛋白"]),
            F("Alanine Aminotransferase (ALT)", unit="U/L", aliases=["ALT", "谷丙转氨酶"]),
            F("Aspartate Aminotransferase (AST)", unit="U/L", aliases=["AST", "谷草转氨酶"]),
            F("Alkaline Phosphatase (ALP)", unit="U/L", aliases=["ALP"]),
            F("Total Bilirubin (TBIL)", unit="μmol/L", aliases=["TBIL", "总胆红素"]),
            F("Blood Urea Nitrogen (BUN)", unit="mmol/L", aliases=["BUN", "尿素氮"]),
            F("Serum Creatinine (SCr)", unit="μmol/L", conv={"mg/dL": 88.4}, aliases=["SCr", "肌酐"]),
            F("Serum Glucose", unit="mmol/L", conv={"mg/dL": 0.0555}, aliases=["GLU", "血糖"]),
            F("Serum Uric Acid (UA)", unit="μmol/L", aliases=["UA", "尿酸"]),
            F("Carbon Dioxide (CO2)", unit="mmol/L", aliases=["CO2CP"]),
        ],
    ),
    scenario(
        "iron5", "Five Iron Profile",
        ["Total Iron Binding Capacity (TIBC)", "Serum Ferritin (SF)", "Serum Iron", "铁五项"],
        [("medical terms like Total Iron Binding Capacity (TIBC) and Serum Ferritin (SF)",
          "the document is likely a Five Iron Profile medical report")],
        [
            F("Serum Iron (SI)", unit="μmol/L", aliases=["SI", "血清铁"]),
            F("Total Iron Binding Capacity (TIBC)", unit="μmol/L", aliases=["TIBC", "总铁结合力"]),
            F("Unsaturated Iron Binding Capacity (UIBC)", unit="μmol/L", aliases=["UIBC"]),
            F("Transferrin Saturation (TS)", unit="%", aliases=["TS", "转铁蛋白饱和度"]),
            F("Serum Ferritin (SF)", unit="ng/mL", conv={"ng/mL": 1},
              aliases=["SF", "血清铁蛋白"]),
            F("Transferrin (TRF)", unit="g/L", conv={"g/dL": 10}, aliases=["TRF", "转铁蛋白"]),
            F("Soluble Transferrin Receptor", unit="mg/L", aliases=["sTfR"]),
            F("Iron Stain Grade", vt="dictionary", options=POS_NEG, aliases=["铁染色"]),
            F("Hepcidin", unit="ng/mL", aliases=["铁调素"]),
            F("Iron Panel Comment", vt="string", aliases=["铁代谢备注"]),
            F("Reticulocyte Hemoglobin", unit="pg", aliases=["CHr"]),
        ],
    ),
    scenario(
        "lipid", "Lipid Panel",
        ["Total Cholesterol", "Triglycerides", "HDL-C", "LDL-C", "血脂"],
        [("cholesterol fractions reported in mmol/L",
          "the report contains a Lipid Panel")],
        [
            F("Total Cholesterol (TC)", unit="mmol/L", conv={"mg/dL": 0.0259}, aliases=["TC", "总胆固醇"]),
            F("Triglycerides (TG)", unit="mmol/L", conv={"mg/dL": 0.0113}, aliases=["TG", "甘油三酯"]),
            F("HDL Cholesterol (HDL-C)", unit="mmol/L", aliases=["HDL-C", "高密度脂蛋白胆固醇"]),
            F("LDL Cholesterol (LDL-C)", unit="mmol/L", aliases=["LDL-C", "低密度脂蛋白胆固醇"]),
            F("Very Low Density Lipoprotein (VLDL)", unit="mmol/L", aliases=["VLDL"]),
            F("Apolipoprotein A1 (ApoA1)", unit="g/L", aliases=["ApoA1"]),
            F("Apolipoprotein B (ApoB)", unit="g/L", aliases=["ApoB"]),
            F("Lipoprotein(a)", unit="mg/L", aliases=["Lp(a)", "脂蛋白a"]),
            F("Non-HDL Cholesterol", unit="mmol/L", aliases=["non-HDL-C"]),
            F("Lipemia Index", vt="integer", aliases=["脂血指数"]),
            F("Fasting Status", vt="dictionary", options={"空腹": "fasting", "餐后": "postprandial"},
              aliases=["是否空腹"]),
        ],
    ),
    scenario(
        "thyroid", "Thyroid Function Panel",
        ["TSH", "Free T3", "Free T4", "甲状腺功能"],
        [("hormone names such as TSH, FT3 and FT4",
          "the report contains a Thyroid Function Panel")],
        [
            F("Thyroid Stimulating Hormone (TSH)", unit="μIU/mL", conv={"mIU/L": 1},
              aliases=["TSH", "促甲状腺激素"]),
            F("Free Triiodothyronine (FT3)", unit="pmol/L", aliases=["FT3"]),
            F("Free Thyroxine (FT4)", unit="pmol/L", aliases=["FT4"]),
            F("Total Triiodothyronine (TT3)", unit="pmol/L", aliases=["TT3"]),
            F("Total Thyroxine (TT4)", unit="pmol/L", aliases=["TT4"]),
            F("Thyroglobulin Antibody (TgAb)", unit="mIU/L", aliases=["TgAb"]),
            F("Thyroid Peroxidase Antibody (TPOAb)", unit="mIU/L", aliases=["TPOAb"]),
            F("Thyrotropin Receptor Antibody (TRAb)", unit="mIU/L", aliases=["TRAb"]),
            F("Thyroglobulin (Tg)", unit="ng/mL", aliases=["Tg"]),
            F("Thyroid Comment", vt="string", aliases=["甲功备注"]),
            F("Sample Hemolyzed", vt="dictionary", options={"是": "yes", "否": "no"},
              aliases=["是否溶血"]),
        ],
    ),
    scenario(
        "coag", "Coagulation Panel",
        ["Prothrombin Time", "APTT", "Fibrinogen", "D-Dimer", "凝血"],
        [("clotting times measured in seconds plus INR",
          "the report contains a Coagulation Panel")],
        [
            F("Prothrombin Time (PT)", unit="s", aliases=["PT", "凝血酶原时间"]),
            F("International Normalized Ratio (INR)", aliases=["INR"]),
            F("Activated Partial Thromboplastin Time (APTT)", unit="s", aliases=["APTT"]),
            F("Thrombin Time (TT)", unit="s", aliases=["凝血酶时间"]),
            F("Fibrinogen (FIB)", unit="g/L", conv={"g/dL": 10}, aliases=["FIB", "纤维蛋白原"]),
            F("D-Dimer", unit="mg/L", aliases=["D二聚体"]),
            F("Fibrin Degradation Products (FDP)", unit="mg/L", aliases=["FDP"]),
            F("Antithrombin III (AT-III)", unit="%", aliases=["AT-III"]),
            F("PT Activity", unit="%", aliases=["PT%"]),
            F("Coagulation Comment", vt="string", aliases=["凝血备注"]),
            F("Citrate Tube Count", vt="integer", aliases=["枸橼酸管数"]),
        ],
    ),
    scenario(
        "esr_crp", "Inflammation Markers",
        ["Erythrocyte Sedimentation Rate", "C-Reactive Protein", "血沉", "炎症指标"],
        [("Sed rate or ESR together with CRP",
          "the report contains Inflammation Markers")],
        [
            F("Erythrocyte Sedimentation Rate (ESR)", unit="mm/h",
              aliases=["Sed rate", "ESR", "血沉"]),
            F("C-Reactive Protein (CRP)", unit="mg/L", aliases=["CRP", "C反应蛋白"]),
            F("High-Sensitivity CRP (hs-CRP)", unit="mg/L", aliases=["hs-CRP"]),
            F("Procalcitonin (PCT)", unit="ng/mL", aliases=["PCT", "降钙素原"]),
            F("Interleukin-6 (IL-6)", unit="ng/mL", aliases=["IL-6"]),
            F("Serum Amyloid A (SAA)", unit="mg/L", aliases=["SAA"]),
            F("Ferritin (Inflammatory)", unit="ng/mL", aliases=["炎症铁蛋白"]),
            F("ESR Method", vt="dictionary", options={"魏氏法": "westergren", "仪器法": "analyzer"},
              aliases=["血沉方法"]),
            F("Inflammation Comment", vt="string", aliases=["炎症备注"]),
            F("Repeat Count", vt="integer", aliases=["复测次数"]),
        ],
    ),
    scenario(
        "bone", "Bone Metabolism Panel",
        ["25-OH Vitamin D", "Parathyroid Hormone", "Osteocalcin", "骨代谢"],
        [("vitamin D together with PTH and bone turnover markers",
          "the report contains a Bone Metabolism Panel")],
        [
            F("25-Hydroxy Vitamin D", unit="ng/mL", aliases=["25-OH-D", "维生素D"]),
            F("Parathyroid Hormone (PTH)", unit="pg", aliases=["PTH", "甲状旁腺激素"]),
            F("Osteocalcin (OC)", unit="ng/mL", aliases=["OC", "骨钙素"]),
            F("Beta-CrossLaps (β-CTX)", unit="ng/mL", aliases=["β-CTX"]),
            F("Procollagen I N-Terminal Propeptide (PINP)", unit="ng/mL", aliases=["PINP"]),
            F("Serum Calcium (Ca)", unit="mmol/L", conv={"mg/dL": 0.25}, aliases=["Ca", "血钙"]),
            F("Serum Phosphorus (P)", unit="mmol/L", aliases=["磷"]),
            F("Bone Alkaline Phosphatase (BALP)", unit="U/L", aliases=["BALP"]),
            F("Urinary Calcium (24h)", unit="mmol/d", aliases=["24小时尿钙"]),
            F("Bone Panel Comment", vt="string", aliases=["骨代谢备注"]),
        ],
    ),
    scenario(
        "liver", "Liver Function Panel",
        ["GGT", "Direct Bilirubin", "Bile Acids", "肝功能"],
        [("bilirubin fractions together with GGT and bile acids",
          "the report contains a Liver Function Panel")],
        [
            F("Gamma-Glutamyl Transferase (GGT)", unit="U/L", aliases=["GGT", "谷氨酰转肽酶"]),
            F("Direct Bilirubin (DBIL)", unit="μmol/L", aliases=["DBIL", "直接胆红素"]),
            F("Indirect Bilirubin (IBIL)", unit="μmol/L", aliases=["IBIL", "间接胆红素"]),
            F("Total Bile Acids (TBA)", unit="μmol/L", aliases=["TBA", "总胆汁酸"]),
            F("Cholinesterase (CHE)", unit="U/L", aliases=["CHE"]),
            F("Prealbumin (PA)", unit="mg/L", aliases=["PA", "前白蛋白"]),
            F("Adenosine Deaminase (ADA)", unit="U/L", aliases=["ADA"]),
            F("Liver Copper (per gram)", unit="U/g", aliases=["肝铜"]),
            F("Hepatitis B Surface Antigen", vt="dictionary", options=POS_NEG, aliases=["HBsAg"]),
            F("Liver Panel Comment", vt="string", aliases=["肝功备注"]),
        ],
    ),
    scenario(
        "renal", "Renal Function Panel",
        ["Cystatin C", "eGFR", "Urine Microalbumin", "肾功能"],
        [("creatinine clearance or eGFR alongside cystatin C",
          "the report contains a Renal Function Panel")],
        [
            F("Cystatin C (CysC)", unit="mg/L", aliases=["CysC", "胱抑素C"]),
            F("Estimated GFR (eGFR)", unit="mL/min", aliases=["eGFR", "肾小球滤过率"]),
            F("Creatinine Clearance (CCr)", unit="mL/min", aliases=["CCr"]),
            F("Urine Microalbumin (mALB)", unit="mg/L", aliases=["mALB", "尿微量白蛋白"]),
            F("Urine Albumin-to-Creatinine Ratio", unit="mg/24h", aliases=["ACR"]),
            F("Beta-2 Microglobulin (β2-MG)", unit="mg/L", aliases=["β2-MG"]),
            F("Serum Osmolality", unit="kPa", aliases=["血渗透压"],
              desc="analyzer reports pressure-equivalent"),
            F("Renal Tubular Casts", unit="HP", aliases=["肾小管管型"]),
            F("Dialysis Status", vt="dictionary", options={"是": "yes", "否": "no"}, aliases=["透析"]),
            F("Renal Panel Comment", vt="string", aliases=["肾功备注"]),
        ],
    ),
    scenario(
        "glucose", "Glycemic Panel",
        ["HbA1c", "Fasting Glucose", "OGTT", "糖代谢"],
        [("HbA1c percentage or an OGTT curve",
          "the report contains a Glycemic Panel")],
        [
            F("Glycated Hemoglobin (HbA1c)", unit="%", aliases=["HbA1c", "糖化血红蛋白"]),
            F("Fasting Plasma Glucose (FPG)", unit="mmol/L", conv={"mg/dL": 0.0555},
              aliases=["FPG", "空腹血糖"]),
            F("2h Postprandial Glucose", unit="mmol/L", conv={"mg/dL": 0.0555}, aliases=["2hPG", "餐后2小时血糖"]),
            F("Fasting Insulin", unit="μIU/mL", aliases=["FINS", "空腹胰岛素"]),
            F("Fasting C-Peptide", unit="ng/mL", aliases=["C肽"]),
            F("Glycated Albumin (GA)", unit="%", aliases=["GA"]),
            F("Insulin Antibody (IAA)", vt="dictionary", options=POS_NEG, aliases=["IAA"]),
            F("OGTT Sample Count", vt="integer", aliases=["OGTT采样点数"]),
            F("Last Meal Time", vt="datetime", aliases=["末次进餐时间"]),
            F("Glycemic Comment", vt="string", aliases=["糖代谢备注"]),
        ],
    ),
    scenario(
        "electrolytes", "Electrolyte Panel",
        ["Potassium", "Sodium", "Chloride", "电解质"],
        [("K+, Na+ and Cl- concentrations in mmol/L",
          "the report contains an Electrolyte Panel")],
        [
            F("Serum Potassium (K)", unit="mmol/L", aliases=["K+", "血钾"]),
            F("Serum Sodium (Na)", unit="mmol/L", aliases=["Na+", "血钠"]),
            F("Serum Chloride (Cl)", unit="mmol/L", aliases=["Cl-", "血氯"]),
            F("Serum Magnesium (Mg)", unit="mmol/L", aliases=["Mg", "血镁"]),
            F("Ionized Calcium", unit="mmol/L", aliases=["iCa", "离子钙"]),
            F("Serum Zinc", unit="μmol/L", conv={"μg/dL": 0.153}, aliases=["血锌"]),
            F("Serum Copper", unit="μmol/L", conv={"μg/dL": 0.157}, aliases=["血铜"]),
            F("Anion Gap", unit="mmol/L", aliases=["AG", "阴离子间隙"]),
            F("Sample Hemolysis Grade", vt="dictionary",
              options={"无": "none", "轻度": "mild", "重度": "severe"}, aliases=["溶血程度"]),
            F("Electrolyte Comment", vt="string", aliases=["电解质备注"]),
        ],
    ),
]

GENERAL_FIELDS = [
    F("Patient Name", vt="string", aliases=["姓名", "Name"], desc="person name; masked before model calls"),
    F("Gender", vt="dictionary", options={"男": "male", "女": "female", "M": "male", "F": "female"},
      aliases=["性别", "Sex"]),
    F("Age", vt="integer", unit="years", aliases=["年龄"]),
    F("Date of Birth", vt="datetime", aliases=["出生日期", "DOB"]),
    F("Height", unit="cm", conv={"m": 100, "cm": 1}, aliases=["身高"]),
    F("Weight", unit="kg", aliases=["体重"]),
    F("Department", vt="string", aliases=["科室", "送检科室"]),
    F("Bed No", vt="string", aliases=["床号"]),
    F("Medical Record No", vt="string", aliases=["病案号", "住院号"], desc="id number; masked before model calls"),
    F("Sample No", vt="string", aliases=["标本号"]),
    F("Barcode", vt="string", aliases=["条码号"]),
    F("Sample Type", vt="string", aliases=["标本类型"]),
    F("Collection Time", vt="datetime", aliases=["采集时间"]),
    F("Receive Time", vt="datetime", aliases=["接收时间"]),
    F("Report Time", vt="datetime", aliases=["报告时间"]),
    F("Requesting Doctor", vt="string", aliases=["送检医生"]),
    F("Reviewer", vt="string", aliases=["审核者"]),
    F("Phone", vt="string", aliases=["电话", "联系电话"], desc="phone number; masked before model calls"),
]

SCHEMA = {"version": 1, "scenarios": SCENARIOS, "general_fields": GENERAL_FIELDS}


def fold(name):
    return re.sub(r"\s+", " ", name.strip().lower())


def check():
    assert len(SCENARIOS) == 13, len(SCENARIOS)
    detail = sum(len(s["fields"]) for s in SCENARIOS)
    assert detail == 137, detail
    assert len(GENERAL_FIELDS) == 18, len(GENERAL_FIELDS)

    units = set()
    types = set()
    general_keys = {fold(g["key"]) for g in GENERAL_FIELDS}
    for scope_name, fields in [(s["id"], s["fields"]) for s in SCENARIOS] + [
        ("general", GENERAL_FIELDS)
    ]:
        names = {}
        for f in fields:
            types.add(f["value_type"])
            if f["canonical_unit"]:
                units.add(f["canonical_unit"])
            units.update(f["unit_conversions"].keys())
            assert (f["value_type"] == "dictionary") == (f["options"] is not None), f["key"]
            for factor in f["unit_conversions"].values():
                assert factor > 0
            for name in [f["key"]] + f["aliases"]:
                folded = fold(name)
                assert folded not in names, f"{scope_name}: duplicate name {name}"
                names[folded] = f["key"]
        if scope_name != "general":
            for f in fields:
                assert fold(f["key"]) not in general_keys, f"{scope_name}: {f['key']} shadows a general key"
    assert types == {"datetime", "integer", "string", "float", "dictionary"}, types
    assert len(units) == 30, (len(units), sorted(units))


def main():
    check()
    out = os.path.join(os.path.dirname(__file__), "..", "fixtures", "schema",
                       "medical_reports.schema.json")
    os.makedirs(os.path.dirname(out), exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(SCHEMA, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
