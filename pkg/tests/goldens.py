"""Reference formulas for the shipped corpus and its perturbations.

GOLDEN holds the fifteen expected translations. Number 6 follows its
sentence ("set to Off"); the disjunct/conjunct order in 4 and 5 is the
published one and differs from sentence order, which is why comparisons go
through normalize().
"""

GOLDEN = {
    1: "G((Regulator_Mode = INIT) => (Output_Regulator_Status = Init))",
    2: "G((Regulator_Mode = NORMAL) => (Output_Regulator_Status = On))",
    3: "G((Regulator_Mode = FAILED) => (Output_Regulator_Status = Failed))",
    4: "G((Upper_Desired_Temperature_Status = Invalid OR "
       "Lower_Desired_Temperature_Status = Invalid) => "
       "(Regulator_Interface_Failure = true))",
    5: "G((Upper_Desired_Temperature_Status = Valid AND "
       "Lower_Desired_Temperature_Status = Valid) => "
       "(Regulator_Interface_Failure = false))",
    6: "G((Regulator_Mode = INIT) => (Heat_Control = Off))",
    7: "G((Regulator_Mode = NORMAL AND "
       "Current_Temperature < Lower_Desired_Temperature = true) => "
       "(Heat_Control = Control_On))",
    8: "G((Regulator_Mode = NORMAL AND "
       "Current_Temperature > Upper_Desired_Temperature = true) => "
       "(Heat_Control = Control_Off))",
    9: "G((Regulator_Mode = FAILED) => (Heat_Control = Control_Off))",
    10: "G((Regulator_Interface_Failure = false AND "
        "Regulator_Internal_Failure = false AND "
        "Current_Temperature_Status = Valid) => (Regulator_Status = true))",
    11: "G((Regulator_Interface_Failure = true OR "
        "Regulator_Internal_Failure = true OR "
        "NOT(Current_Temperature_Status = Valid)) => (Regulator_Status = false))",
    12: "Regulator_Mode = INIT",
    13: "G((Regulator_Mode = INIT AND Regulator_Status = true) => "
        "X(Regulator_Mode = NORMAL))",
    14: "G((Regulator_Mode = NORMAL AND Regulator_Status = false) => "
        "X(Regulator_Mode = FAILED))",
    15: "G((Regulator_Mode = INIT AND Regulator_Init_Timeout = true) => "
        "X(Regulator_Mode = FAILED))",
}

# Expected translations after rewriting every clause-level "and" to "or".
GOLDEN_AND_TO_OR = {
    5: "G((Upper_Desired_Temperature_Status = Valid OR "
       "Lower_Desired_Temperature_Status = Valid) => "
       "(Regulator_Interface_Failure = false))",
    7: "G((Regulator_Mode = NORMAL OR "
       "Current_Temperature < Lower_Desired_Temperature) => "
       "(Heat_Control = Control_On))",
    8: "G((Regulator_Mode = NORMAL OR "
       "Current_Temperature > Upper_Desired_Temperature) => "
       "(Heat_Control = Control_Off))",
    10: "G((Regulator_Interface_Failure = false OR "
        "Regulator_Internal_Failure = false OR "
        "Current_Temperature_Status = Valid) => (Regulator_Status = true))",
    13: "G((Regulator_Mode = INIT OR Regulator_Status = true) => "
        "X(Regulator_Mode = NORMAL))",
    14: "G((Regulator_Mode = NORMAL OR Regulator_Status = false) => "
        "X(Regulator_Mode = FAILED))",
    15: "G((Regulator_Mode = INIT OR Regulator_Init_Timeout = true) => "
        "X(Regulator_Mode = FAILED))",
}

# Expected translations after toggling "is" <-> "is not" everywhere.
GOLDEN_IS_TO_IS_NOT = {
    7: "G((Regulator_Mode = NORMAL AND "
       "NOT(Current_Temperature < Lower_Desired_Temperature)) => "
       "(Heat_Control = Control_On))",
    8: "G((Regulator_Mode = NORMAL AND "
       "NOT(Current_Temperature > Upper_Desired_Temperature)) => "
       "(Heat_Control = Control_Off))",
    10: "G((NOT(Regulator_Interface_Failure = false) AND "
        "NOT(Regulator_Internal_Failure = false) AND "
        "NOT(Current_Temperature_Status = Valid)) => (Regulator_Status = true))",
    11: "G((NOT(Regulator_Interface_Failure = true) OR "
        "NOT(Regulator_Internal_Failure = true) OR "
        "Current_Temperature_Status = Valid) => (Regulator_Status = false))",
    14: "G((NOT(Regulator_Mode = NORMAL) AND NOT(Regulator_Status = false)) => "
        "X(Regulator_Mode = FAILED))",
    15: "G((NOT(Regulator_Mode = INIT) AND NOT(Regulator_Init_Timeout = true)) => "
        "X(Regulator_Mode = FAILED))",
}

EQ1 = "G NOT(Regulator_Status = true AND Regulator_Init_Timeout = true)"

FAILED_TO_INIT_SENTENCE = (
    "If the Regulator Mode equals FAILED and the Regulator Init Timeout "
    "equals True, the Regulator Mode shall be set to INIT.")

SAFETY_THEOREM = "G(Regulator_Mode = FAILED => NOT(F(Regulator_Mode = NORMAL)))"
